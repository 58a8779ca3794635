#ifndef WCA_ERROR_HPP
#define WCA_ERROR_HPP

#include <sstream>
#include <stdexcept>
#include <string>

namespace wca {

// Every failure in the library surfaces as this type; the CLI converts it
// into a structured stderr diagnostic and a nonzero exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void cat_into(std::ostringstream&) {}
template <typename T, typename... Rest>
void cat_into(std::ostringstream& os, const T& v, const Rest&... rest) {
    os << v;
    cat_into(os, rest...);
}
}  // namespace detail

template <typename... Parts>
std::string cat(const Parts&... parts) {
    std::ostringstream os;
    os.precision(17);
    detail::cat_into(os, parts...);
    return os.str();
}

template <typename... Parts>
[[noreturn]] void fail(const Parts&... parts) {
    throw Error(cat(parts...));
}

template <typename... Parts>
void require(bool cond, const Parts&... parts) {
    if (!cond) fail(parts...);
}

}  // namespace wca

#endif
