#pragma once

#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace stokeswave {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel& log_level();

void log_msg(LogLevel lvl, const std::string& msg);

inline void log_warn(const std::string& msg) { log_msg(LogLevel::Warn, msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log_msg(LogLevel::Debug, msg); }

// Runs fn(i) for i in [0, n). Worker results must not depend on execution
// order. nthreads <= 1 runs inline.
void parallel_for(int n, int nthreads, const std::function<void(int)>& fn);

}  // namespace stokeswave
