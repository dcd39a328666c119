#pragma once

#include <functional>
#include <string>

namespace sehsn {

using LogSink = std::function<void(const std::string&)>;

// Warnings go to stderr unless a sink is installed (tests capture them).
void set_warning_sink(LogSink sink);
void warn(const std::string& message);

}  // namespace sehsn
