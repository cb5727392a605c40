#pragma once

#include <ostream>
#include <span>
#include <string>

#include "json.hpp"

#include "cclock/bitcoin_sim.hpp"
#include "cclock/general_sim.hpp"
#include "cclock/mm1.hpp"
#include "cclock/threshold.hpp"

namespace cclock::io {

using Json = nlohmann::json;

/// Shortest round-trip decimal form; non-finite values print as nan/inf.
std::string format_real(double x);

/// NaN and infinities become null.
Json real_or_null(double x);

// bitcoin-sim
void write_samples_csv(std::ostream& os, const bitcoin::EnsembleSummary& s);  // replica,tau_c_minutes
void write_tail_csv(std::ostream& os, std::span<const bitcoin::TailPoint> tail);  // t_minutes,log_survival
Json bitcoin_summary_json(const BitcoinParams& bp, const bitcoin::EnsembleSummary& s);

// general-sim
void write_t_cycles_csv(std::ostream& os, std::span<const std::int64_t> t_values);  // replica,t_cycles
void write_cycles_csv(std::ostream& os, const general::LastPassageSummary& s);  // replica,cycle,x,y,empty_len,busy_len
Json general_summary_json(const ThresholdReport& report, const general::LastPassageSummary& s,
                          std::size_t n, std::uint64_t master_seed);

// params / bitcoin-analytic
Json threshold_json(const ThresholdReport& report);
Json analytic_json(const BitcoinParams& bp, StartState start);
void write_transform_csv(std::ostream& os, const BitcoinParams& bp, StartState start,
                         int points);  // s,tau_lt

}  // namespace cclock::io
