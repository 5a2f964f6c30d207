#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <set>

#include "accept.hpp"

namespace accept {

void expect(Outcome& o, bool cond, const std::string& what) {
  if (!cond) o.pass = false;
  o.notes.push_back(std::string(cond ? "ok   " : "FAIL ") + what);
}

void note(Outcome& o, const std::string& what) { o.notes.push_back("info " + what); }

std::string fmt(const char* f, ...) {
  char buf[768];
  va_list args;
  va_start(args, f);
  vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

void progress(const std::string& what) {
  std::fprintf(stderr, "        [lab] %s\n", what.c_str());
  std::fflush(stderr);
}

}  // namespace accept

// Runs every acceptance criterion (or just the ids given as arguments) and
// prints one PASS/FAIL line per criterion. Exit status = number of failures.
int main(int argc, char** argv) {
  using namespace accept;
  std::set<int> only;
  for (int i = 1; i < argc; i++) only.insert(std::atoi(argv[i]));

  std::vector<Criterion> all = mathCriteria();
  for (auto& c : pipelineCriteria()) all.push_back(std::move(c));
  std::sort(all.begin(), all.end(),
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });

  int failures = 0;
  for (auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("FAIL unexpected exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d [%s] %s  (%.1fs)\n", c.id, o.pass ? "PASS" : "FAIL",
                c.title.c_str(), secs);
    for (const auto& n : o.notes) std::printf("              %s\n", n.c_str());
    std::fflush(stdout);
    if (!o.pass) failures++;
  }
  if (failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criterion(s) FAILED\n", failures);
  return failures;
}
