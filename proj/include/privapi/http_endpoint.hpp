#pragma once

#include <string>
#include <string_view>

namespace privapi {

struct HttpEndpoint {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // "" or "/base", never a trailing slash
};

// Splits "http://host:8080/v1/" into {"http://host:8080", "/v1"}.
HttpEndpoint parse_http_endpoint(std::string_view url);

}  // namespace privapi
