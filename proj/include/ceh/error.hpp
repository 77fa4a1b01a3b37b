#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ceh {

// All failures carry a stable machine-readable code ("not hermitian",
// "tensor dimension overflow", ...) plus an optional human detail string.
class Error : public std::runtime_error {
public:
    explicit Error(std::string code, std::string detail = "")
        : std::runtime_error(detail.empty() ? code : code + ": " + detail),
          code_(std::move(code)),
          detail_(std::move(detail)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string code_;
    std::string detail_;
};

}  // namespace ceh
