#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "sinkflow/flow.hpp"
#include "sinkflow/sinkhorn.hpp"

namespace sinkflow {

/// Provenance line written first in every output file.
struct RunHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
};

inline constexpr const char* kFlowTraceColumns =
    "step,t,H,fisher,dH_fd,C_pi,lsi_ratio,rate1,rate2,row_marginal_err";
inline constexpr const char* kSinkhornTraceColumns = "step,sweep,kind,h_row,h_col,h_ref,h_step";

/// "%.17g" formatting; LF line endings; absent optionals are empty fields.
std::string format_number(double value);

void write_flow_trace(std::ostream& out, const RunHeader& header, const FlowTrace& trace);
void write_sinkhorn_trace(std::ostream& out, const RunHeader& header, const SinkhornTrace& trace);

/// Inverse of write_flow_trace. gamma is recovered from (t, step) of the
/// second record and record_every from its step. Throws Io on malformed input.
FlowTrace read_flow_trace(std::istream& in, RunHeader* header = nullptr);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace sinkflow
