#include "actrec/common.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace actrec {

namespace {

void default_warn(const std::string& message) {
    std::fprintf(stderr, "warning: %s\n", message.c_str());
}

WarnHandler g_warn_handler = &default_warn;

}  // namespace

void warn(const std::string& message) {
    g_warn_handler(message);
}

WarnHandler set_warn_handler(WarnHandler handler) {
    WarnHandler previous = g_warn_handler;
    g_warn_handler = handler ? handler : &default_warn;
    return previous;
}

std::string format_double(double value) {
    char buf[64];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) {
            break;
        }
    }
    return buf;
}

}  // namespace actrec
