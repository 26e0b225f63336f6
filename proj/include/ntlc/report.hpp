#ifndef NTLC_REPORT_HPP
#define NTLC_REPORT_HPP

#include <string>

#include "ntlc/harness.hpp"

namespace ntlc {

// MetricsFile: JSON carrying the report plus the raw scores/labels needed to
// recompute every headline number.
std::string metrics_to_json(const EvalReport& report);
EvalReport metrics_from_json(const std::string& text);

void write_metrics_file(const std::string& path, const EvalReport& report);
EvalReport read_metrics_file(const std::string& path);

} // namespace ntlc

#endif
