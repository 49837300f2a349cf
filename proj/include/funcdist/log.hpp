#pragma once

#include <string>

namespace funcdist::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Threshold comes from the FUNCDIST_LOG environment variable
// (error|warn|info|debug); default warn. Messages go to stderr so stdout
// stays clean for data.
Level threshold();
void set_threshold(Level lv);

void write(Level lv, const std::string& msg);

inline void error(const std::string& m) { write(Level::Error, m); }
inline void warn(const std::string& m)  { write(Level::Warn, m); }
inline void info(const std::string& m)  { write(Level::Info, m); }
inline void debug(const std::string& m) { write(Level::Debug, m); }

}  // namespace funcdist::log
