#include "privapi/http_endpoint.hpp"

#include "privapi/error.hpp"

namespace privapi {

HttpEndpoint parse_http_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || url.substr(0, scheme_end) != "http") {
    throw Error(Errc::InvalidConfig, "endpoint must be an http:// URL: " + std::string(url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  HttpEndpoint ep;
  ep.origin = std::string(url.substr(0, path_start));
  if (path_start != std::string_view::npos) {
    ep.path_prefix = std::string(url.substr(path_start));
    while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  }
  if (ep.origin.size() <= scheme_end + 3) throw Error(Errc::InvalidConfig, "endpoint has no host: " + std::string(url));
  return ep;
}

}  // namespace privapi
