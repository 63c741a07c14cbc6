#pragma once

// Record of one erasure execution, shared by the protocol, energetics and
// analysis layers.

#include <cstdint>
#include <optional>
#include <string_view>

#include "erasure/measurement.hpp"

namespace erasure {

enum class Well { left, right };
enum class InitWell { left, right, random };
enum class ProtocolKind { feedback, open_loop };

inline std::string_view to_string(Well w) { return w == Well::left ? "left" : "right"; }
inline std::string_view to_string(Action a) { return a == Action::act ? "act" : "no_action"; }
inline std::string_view to_string(ProtocolKind k) { return k == ProtocolKind::feedback ? "feedback" : "openloop"; }
inline std::string_view to_string(InitWell w) {
  switch (w) {
    case InitWell::left: return "left";
    case InitWell::right: return "right";
    default: return "random";
  }
}

struct ErasureRun {
  std::uint64_t run_id = 0;
  ProtocolKind kind = ProtocolKind::feedback;
  double d = 0.7;
  std::optional<double> sigma_n;  // nm; absent for open-loop runs
  Well initial_well = Well::left;
  double x_at_tm = 0.0;           // nm
  std::optional<double> m;        // nm; absent for open-loop runs
  Action action = Action::no_action;
  double W1 = 0.0;       // k_BT
  double W2 = 0.0;       // k_BT
  double W_total = 0.0;  // k_BT
  double x_final = 0.0;  // nm
  bool success = false;
};

}  // namespace erasure
