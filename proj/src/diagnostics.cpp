#include "muspark/diagnostics.hpp"

#include <sstream>

namespace muspark {

std::string format_diagnostic(const Diagnostic& d) {
    std::ostringstream os;
    os << to_string(d.location) << ": [" << d.rule << "] " << d.message;
    if (!d.path.empty()) os << " (path " << d.path;
    if (!d.required.empty()) {
        os << ", required {";
        for (std::size_t i = 0; i < d.required.size(); ++i) {
            if (i) os << ",";
            os << d.required[i];
        }
        os << "}";
        if (!d.actual.empty()) os << ", actual " << d.actual;
    }
    if (!d.path.empty()) os << ")";
    return os.str();
}

} // namespace muspark
