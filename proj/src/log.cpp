#include "funcdist/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace funcdist::log {

namespace {

Level g_threshold = [] {
    const char* env = std::getenv("FUNCDIST_LOG");
    if (!env) return Level::Warn;
    if (std::strcmp(env, "error") == 0) return Level::Error;
    if (std::strcmp(env, "warn") == 0)  return Level::Warn;
    if (std::strcmp(env, "info") == 0)  return Level::Info;
    if (std::strcmp(env, "debug") == 0) return Level::Debug;
    return Level::Warn;
}();

std::mutex g_mutex;

const char* tag(Level lv) {
    switch (lv) {
        case Level::Error: return "error";
        case Level::Warn:  return "warn";
        case Level::Info:  return "info";
        case Level::Debug: return "debug";
    }
    return "?";
}

}  // namespace

Level threshold() { return g_threshold; }
void set_threshold(Level lv) { g_threshold = lv; }

void write(Level lv, const std::string& msg) {
    if (static_cast<int>(lv) > static_cast<int>(g_threshold)) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::fprintf(stderr, "[funcdist:%s] %s\n", tag(lv), msg.c_str());
}

}  // namespace funcdist::log
