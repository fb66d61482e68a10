#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rde/core.hpp"

namespace rde {

enum class RunMode { OV, CRV, IRV };

inline std::string_view mode_name(RunMode m) {
  switch (m) {
    case RunMode::OV: return "OV";
    case RunMode::CRV: return "CRV";
    case RunMode::IRV: return "IRV";
  }
  return "?";
}

inline RunMode parse_mode(std::string_view s) {
  if (s == "OV") return RunMode::OV;
  if (s == "CRV") return RunMode::CRV;
  if (s == "IRV") return RunMode::IRV;
  throw ConfigurationError("unknown run mode '" + std::string(s) + "' (expected OV, CRV, or IRV)");
}

enum class EventKind { Trigger, ExitDiv, ExitGen, Replace, Restart };

inline std::string_view event_name(EventKind k) {
  switch (k) {
    case EventKind::Trigger: return "TRIGGER";
    case EventKind::ExitDiv: return "EXIT_DIV";
    case EventKind::ExitGen: return "EXIT_GEN";
    case EventKind::Replace: return "REPLACE";
    case EventKind::Restart: return "RESTART";
  }
  return "?";
}

inline EventKind parse_event(std::string_view s) {
  if (s == "TRIGGER") return EventKind::Trigger;
  if (s == "EXIT_DIV") return EventKind::ExitDiv;
  if (s == "EXIT_GEN") return EventKind::ExitGen;
  if (s == "REPLACE") return EventKind::Replace;
  if (s == "RESTART") return EventKind::Restart;
  throw UsageError("unknown event '" + std::string(s) + "'");
}

struct TracePoint {
  std::uint64_t fes = 0;
  double best_error = 0.0;
};

struct RunEvent {
  std::uint64_t fes = 0;
  EventKind kind = EventKind::Trigger;
  double diversity = 0.0;
  std::size_t np = 0;
};

// Per-run trace: (FES, best-error) samples, the event log, and the final
// result. Immutable once a run completes.
struct RunRecord {
  std::string fingerprint;
  std::uint64_t seed = 0;
  std::vector<TracePoint> samples;
  std::vector<RunEvent> events;
  double final_error = std::numeric_limits<double>::infinity();
  std::uint64_t evaluations = 0;
  double wall_seconds = 0.0;
  std::string error;  // non-empty when the run aborted

  bool ok() const { return error.empty(); }
};

// Shortest round-trip decimal form, locale independent.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

// Best-error sampling: a point at every improvement, plus checkpoints every
// MFES/100 evaluations, plus a terminal point.
class Tracer {
 public:
  Tracer(std::uint64_t mfes, double f_star)
      : f_star_(f_star),
        step_(std::max<std::uint64_t>(1, mfes / 100)),
        next_checkpoint_(step_) {}

  void observe(std::uint64_t fes, double best_fitness_value) {
    if (best_fitness_value < run_best_) run_best_ = best_fitness_value;
    const double err = run_best_ - f_star_;
    const bool improved = samples_.empty() || err < samples_.back().best_error;
    bool checkpoint = false;
    while (fes >= next_checkpoint_) {
      checkpoint = true;
      next_checkpoint_ += step_;
    }
    if (!improved && !checkpoint) return;
    if (!samples_.empty() && samples_.back().fes == fes)
      samples_.back().best_error = err;
    else
      samples_.push_back(TracePoint{fes, err});
  }

  double run_best() const { return run_best_; }
  double run_best_error() const { return run_best_ - f_star_; }

  std::vector<TracePoint> finalize(std::uint64_t final_fes) {
    if (samples_.empty() || samples_.back().fes < final_fes)
      samples_.push_back(TracePoint{final_fes, run_best_error()});
    return std::move(samples_);
  }

 private:
  double f_star_;
  std::uint64_t step_;
  std::uint64_t next_checkpoint_;
  double run_best_ = std::numeric_limits<double>::infinity();
  std::vector<TracePoint> samples_;
};

inline void write_trace_csv(std::ostream& out, std::span<const TracePoint> samples) {
  out << "fes,best_error\n";
  for (const TracePoint& p : samples)
    out << p.fes << ',' << format_double(p.best_error) << '\n';
}

inline std::vector<TracePoint> read_trace_csv(std::istream& in) {
  std::vector<TracePoint> points;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw UsageError("trace csv: malformed line '" + line + "'");
    TracePoint p;
    p.fes = std::stoull(line.substr(0, comma));
    p.best_error = std::stod(line.substr(comma + 1));
    points.push_back(p);
  }
  return points;
}

inline void write_events_csv(std::ostream& out, std::span<const RunEvent> events) {
  out << "fes,event,diversity,np\n";
  for (const RunEvent& e : events)
    out << e.fes << ',' << event_name(e.kind) << ',' << format_double(e.diversity) << ','
        << e.np << '\n';
}

inline std::vector<RunEvent> read_events_csv(std::istream& in) {
  std::vector<RunEvent> events;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string fes, kind, div, np;
    if (!std::getline(ss, fes, ',') || !std::getline(ss, kind, ',') ||
        !std::getline(ss, div, ',') || !std::getline(ss, np, ','))
      throw UsageError("events csv: malformed line '" + line + "'");
    events.push_back(RunEvent{std::stoull(fes), parse_event(kind), std::stod(div),
                              static_cast<std::size_t>(std::stoull(np))});
  }
  return events;
}

}  // namespace rde
