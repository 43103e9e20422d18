#include "scc/timetags.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace scc {

namespace {

bool parse_long(const std::string& cell, long& out) {
  try {
    std::size_t used = 0;
    out = std::stol(cell, &used);
    return used == cell.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_i64(const std::string& cell, std::int64_t& out) {
  try {
    std::size_t used = 0;
    out = std::stoll(cell, &used);
    return used == cell.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

IngestResult ingest_timetags(std::istream& is, const IngestOptions& options) {
  IngestResult res;
  std::vector<TimeTagRecord> records;
  long declared_shots = -1;

  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("total_shots=");
      if (pos != std::string::npos) declared_shots = std::stol(line.substr(pos + 12));
      continue;
    }
    if (first && line.rfind("shot_id", 0) == 0) {
      first = false;
      continue;
    }
    first = false;

    std::istringstream ss(line);
    std::string f1, f2, f3;
    TimeTagRecord rec;
    long chan = 0;
    bool ok = std::getline(ss, f1, ',') && std::getline(ss, f2, ',') && std::getline(ss, f3) &&
              parse_long(f1, rec.shot_id) && parse_i64(f2, rec.time_ns) &&
              parse_long(f3, chan);
    rec.channel = static_cast<int>(chan);
    if (!ok || rec.shot_id < 0 || rec.time_ns < 0) {
      ++res.malformed_lines;
      if (options.strict)
        throw std::runtime_error("malformed time-tag line: " + line);
      continue;
    }
    if (options.strict && !records.empty()) {
      const auto& prev = records.back();
      if (rec.shot_id < prev.shot_id ||
          (rec.shot_id == prev.shot_id && rec.time_ns < prev.time_ns))
        throw std::runtime_error("unsorted time-tag input in strict mode: " + line);
    }
    records.push_back(rec);
  }

  std::stable_sort(records.begin(), records.end(), [](const auto& x, const auto& y) {
    return x.shot_id != y.shot_id ? x.shot_id < y.shot_id : x.time_ns < y.time_ns;
  });

  long max_shot = -1;
  for (const auto& r : records) max_shot = std::max(max_shot, r.shot_id);
  res.shots = std::max(declared_shots, max_shot + 1);

  std::vector<long> counts(static_cast<std::size_t>(std::max(res.shots, 0L)), 0);
  for (const auto& r : records) {
    if (options.window_ns >= 0 && r.time_ns >= options.window_ns) {
      ++res.discarded_out_of_window;
      continue;
    }
    if (r.shot_id < res.shots) ++counts[static_cast<std::size_t>(r.shot_id)];
  }
  for (long c : counts) res.histogram.add(c);
  return res;
}

void export_timetags(std::ostream& os, const std::vector<ShotResult>& shots,
                     std::int64_t window_ns) {
  os << "shot_id,time_ns,channel\n";
  os << "# total_shots=" << shots.size() << "\n";
  for (std::size_t k = 0; k < shots.size(); ++k) {
    long n = shots[k].photon_count;
    for (long i = 0; i < n; ++i) {
      // Deterministic placement, evenly spread over the window.
      std::int64_t t = static_cast<std::int64_t>(
          (static_cast<double>(i) + 0.5) / static_cast<double>(n) *
          static_cast<double>(window_ns));
      if (t >= window_ns) t = window_ns - 1;
      os << k << "," << t << ",0\n";
    }
  }
}

}  // namespace scc
