#include "privapi/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <mutex>

#include "privapi/error.hpp"

extern char** environ;

namespace privapi {

namespace {

std::string resolve_program(const std::string& name) {
  if (name.find('/') != std::string::npos) return name;
  const char* path = std::getenv("PATH");
  std::string dirs = path ? path : "/usr/bin:/bin";
  std::size_t start = 0;
  while (start <= dirs.size()) {
    auto end = dirs.find(':', start);
    if (end == std::string::npos) end = dirs.size();
    std::string dir = dirs.substr(start, end - start);
    if (dir.empty()) dir = ".";
    std::string candidate = dir + "/" + name;
    if (::access(candidate.c_str(), X_OK) == 0) return candidate;
    start = end + 1;
  }
  throw Error(Errc::RunnerUnavailable, "program not found on PATH: " + name);
}

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fd, O_CLOEXEC) != 0) throw Error(Errc::Io, std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    close_fd(fd[0]);
    close_fd(fd[1]);
  }
};

}  // namespace

ProcessResult run_process(const ProcessOptions& options) {
  if (options.argv.empty()) throw Error(Errc::InvalidArgs, "empty command");
  static std::once_flag sigpipe_once;
  std::call_once(sigpipe_once, [] { ::signal(SIGPIPE, SIG_IGN); });
  const std::string program = resolve_program(options.argv.front());

  // everything the child needs is prepared before fork
  std::vector<std::string> env_storage;
  for (char** e = environ; *e; ++e) {
    std::string entry(*e);
    auto key = entry.substr(0, entry.find('='));
    if (!options.env.contains(key)) env_storage.push_back(std::move(entry));
  }
  for (const auto& [k, v] : options.env) env_storage.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& e : env_storage) envp.push_back(e.data());
  envp.push_back(nullptr);
  std::vector<std::string> argv_storage = options.argv;
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  argv.push_back(nullptr);

  Pipe in_pipe, out_pipe, err_pipe, exec_pipe;
  const auto started = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(Errc::RunnerUnavailable, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe.fd[0], STDIN_FILENO);
    ::dup2(out_pipe.fd[1], STDOUT_FILENO);
    ::dup2(err_pipe.fd[1], STDERR_FILENO);
    if (options.cpu_limit_secs > 0) {
      rlimit lim{static_cast<rlim_t>(options.cpu_limit_secs), static_cast<rlim_t>(options.cpu_limit_secs + 1)};
      ::setrlimit(RLIMIT_CPU, &lim);
    }
    if (options.memory_limit_mb > 0) {
      const auto bytes = static_cast<rlim_t>(options.memory_limit_mb) * 1024 * 1024;
      rlimit lim{bytes, bytes};
      ::setrlimit(RLIMIT_AS, &lim);
    }
    ::execve(program.c_str(), argv.data(), envp.data());
    const int err = errno;
    [[maybe_unused]] auto n = ::write(exec_pipe.fd[1], &err, sizeof err);
    ::_exit(127);
  }
  ::setpgid(pid, pid);

  close_fd(in_pipe.fd[0]);
  close_fd(out_pipe.fd[1]);
  close_fd(err_pipe.fd[1]);
  close_fd(exec_pipe.fd[1]);

  int exec_errno = 0;
  if (::read(exec_pipe.fd[0], &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    ::waitpid(pid, nullptr, 0);
    throw Error(Errc::RunnerUnavailable, "cannot execute " + program + ": " + std::strerror(exec_errno));
  }

  for (int fd : {in_pipe.fd[1], out_pipe.fd[0], err_pipe.fd[0]}) ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
  if (options.stdin_data.empty()) close_fd(in_pipe.fd[1]);

  ProcessResult result;
  std::size_t written = 0;
  bool exited = false;
  int status = 0;
  const bool has_deadline = options.wall_timeout_secs > 0.0;
  const auto deadline = started + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                      std::chrono::duration<double>(options.wall_timeout_secs));
  char buf[65536];

  while (out_pipe.fd[0] >= 0 || err_pipe.fd[0] >= 0 || !exited) {
    if (!exited) {
      const pid_t r = ::waitpid(pid, &status, WNOHANG);
      if (r == pid) exited = true;
    }
    const auto now = std::chrono::steady_clock::now();
    if (has_deadline && now >= deadline) {
      if (!exited) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        exited = true;
        result.timed_out = true;
      } else {
        ::kill(-pid, SIGKILL);  // stray children holding our pipes
      }
      break;
    }
    if (exited && out_pipe.fd[0] < 0 && err_pipe.fd[0] < 0) break;

    std::vector<pollfd> fds;
    if (in_pipe.fd[1] >= 0) fds.push_back({in_pipe.fd[1], POLLOUT, 0});
    if (out_pipe.fd[0] >= 0) fds.push_back({out_pipe.fd[0], POLLIN, 0});
    if (err_pipe.fd[0] >= 0) fds.push_back({err_pipe.fd[0], POLLIN, 0});
    int wait_ms = 50;
    if (has_deadline) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      wait_ms = static_cast<int>(std::max<long long>(1, std::min<long long>(wait_ms, left)));
    }
    if (fds.empty()) {
      ::usleep(static_cast<useconds_t>(wait_ms) * 1000);
      continue;
    }
    if (::poll(fds.data(), fds.size(), wait_ms) < 0 && errno != EINTR) break;

    for (const auto& p : fds) {
      if (p.revents == 0) continue;
      if (p.fd == in_pipe.fd[1]) {
        if (p.revents & (POLLERR | POLLHUP)) {
          close_fd(in_pipe.fd[1]);
          continue;
        }
        const auto n = ::write(p.fd, options.stdin_data.data() + written, options.stdin_data.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (written == options.stdin_data.size() || (n < 0 && errno != EAGAIN)) close_fd(in_pipe.fd[1]);
        continue;
      }
      const bool is_out = p.fd == out_pipe.fd[0];
      const auto n = ::read(p.fd, buf, sizeof buf);
      if (n > 0) {
        (is_out ? result.out : result.err).append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EAGAIN) {
        close_fd(is_out ? out_pipe.fd[0] : err_pipe.fd[0]);
      }
    }
  }
  if (!exited) ::waitpid(pid, &status, 0);

  result.duration_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.term_signal = WTERMSIG(status);
  }
  return result;
}

}  // namespace privapi
