#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace decc::log {

using Sink = std::function<void(std::string_view)>;

/// Replaces the warning sink; an empty sink restores the default (stderr).
void set_sink(Sink sink);

void warn(std::string_view message);

/// Number of warnings emitted since process start.
std::size_t warning_count();

/// Swaps in a sink for the lifetime of the guard.
class ScopedSink {
public:
  explicit ScopedSink(Sink sink);
  ~ScopedSink();
  ScopedSink(const ScopedSink&) = delete;
  ScopedSink& operator=(const ScopedSink&) = delete;

private:
  Sink previous_;
};

}  // namespace decc::log
