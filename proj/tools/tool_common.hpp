#pragma once

#include <atomic>
#include <csignal>

// SIGINT/SIGTERM flip a flag the event loops poll, so every tool drains
// and writes its counters before leaving.

namespace nctool {

inline std::atomic<bool> g_stop{false};

inline void stop_handler(int) { g_stop.store(true, std::memory_order_relaxed); }

inline void install_stop_handlers() {
    std::signal(SIGINT, stop_handler);
    std::signal(SIGTERM, stop_handler);
}

} // namespace nctool
