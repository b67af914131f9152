#include "decc/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace decc::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink;
  return sink;
}

std::atomic<std::size_t> g_count{0};

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  current_sink() = std::move(sink);
}

void warn(std::string_view message) {
  ++g_count;
  std::lock_guard lock(sink_mutex());
  if (current_sink()) {
    current_sink()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

std::size_t warning_count() { return g_count.load(); }

ScopedSink::ScopedSink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  previous_ = std::exchange(current_sink(), std::move(sink));
}

ScopedSink::~ScopedSink() {
  std::lock_guard lock(sink_mutex());
  current_sink() = std::move(previous_);
}

}  // namespace decc::log
