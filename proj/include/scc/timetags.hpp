#ifndef SCC_TIMETAGS_HPP
#define SCC_TIMETAGS_HPP

#include <cstdint>
#include <iosfwd>

#include "scc/montecarlo.hpp"
#include "scc/readout.hpp"

namespace scc {

// Time-tagged photon record: CSV lines "shot_id,time_ns,channel" with an
// optional header and an optional "# total_shots=N" comment so shots with
// zero detected photons survive a round trip.
struct TimeTagRecord {
  long shot_id = 0;
  std::int64_t time_ns = 0;
  int channel = 0;
};

struct IngestResult {
  Histogram histogram;
  long shots = 0;
  long malformed_lines = 0;
  long discarded_out_of_window = 0;
};

struct IngestOptions {
  std::int64_t window_ns = -1;  // counting window per shot; <0 keeps everything
  bool strict = false;          // abort on malformed or unsorted input
};

IngestResult ingest_timetags(std::istream& is, const IngestOptions& options = {});

// Synthetic export of simulated shots. Photon arrivals are placed
// deterministically (evenly over the window); only counts are physical.
void export_timetags(std::ostream& os, const std::vector<ShotResult>& shots,
                     std::int64_t window_ns);

}  // namespace scc

#endif
