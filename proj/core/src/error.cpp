#include "sehsn/error.hpp"

namespace sehsn {

void throw_data_error(const std::string& where, const std::string& what) {
  throw DataError(where + ": " + what);
}

}  // namespace sehsn

#include <iostream>
#include <mutex>

#include "sehsn/log.hpp"

namespace sehsn {
namespace {
std::mutex g_sink_mutex;
LogSink g_sink;
}  // namespace

void set_warning_sink(LogSink sink) {
  std::lock_guard lock(g_sink_mutex);
  g_sink = std::move(sink);
}

void warn(const std::string& message) {
  std::lock_guard lock(g_sink_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "warning: " << message << "\n";
  }
}

}  // namespace sehsn
