#include "sinkflow/trace_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "sinkflow/error.hpp"

namespace sinkflow {

namespace {

std::string field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

void write_header(std::ostream& out, const RunHeader& h) {
  out << "# config_hash=" << h.config_hash << ",seed=" << h.seed << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& s) {
  // strtod accepts the full %.17g output including inf/nan spellings.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw Error(ErrorCode::Io, "malformed number '" + s + "'");
  return v;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

long parse_long(const std::string& s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::Io, "malformed integer '" + s + "'");
  return v;
}

std::string_view kind_name(HalfStep k) {
  switch (k) {
    case HalfStep::init: return "init";
    case HalfStep::row: return "row";
    case HalfStep::col: return "col";
  }
  return "?";
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_flow_trace(std::ostream& out, const RunHeader& header, const FlowTrace& trace) {
  write_header(out, header);
  out << kFlowTraceColumns << '\n';
  for (const auto& r : trace.records) {
    out << r.step << ',' << format_number(r.t) << ',' << format_number(r.entropy) << ','
        << format_number(r.fisher) << ',' << field(r.dh_fd) << ',' << field(r.poincare_c) << ','
        << field(r.lsi_ratio) << ',' << field(r.rate1) << ',' << field(r.rate2) << ','
        << format_number(r.row_marginal_err) << '\n';
  }
}

void write_sinkhorn_trace(std::ostream& out, const RunHeader& header, const SinkhornTrace& trace) {
  write_header(out, header);
  out << kSinkhornTraceColumns << '\n';
  for (const auto& r : trace.records) {
    out << r.step << ',' << r.sweep << ',' << kind_name(r.kind) << ',' << format_number(r.h_row)
        << ',' << format_number(r.h_col) << ',' << field(r.h_ref) << ',' << field(r.h_step)
        << '\n';
  }
}

FlowTrace read_flow_trace(std::istream& in, RunHeader* header) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw Error(ErrorCode::Io, "missing provenance header");
  if (header) {
    for (const auto& kv : split(line.substr(2))) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq);
      const std::string val = kv.substr(eq + 1);
      if (key == "config_hash") header->config_hash = val;
      if (key == "seed") header->seed = std::stoull(val);
    }
  }
  if (!std::getline(in, line) || line != kFlowTraceColumns)
    throw Error(ErrorCode::Io, "unexpected trace columns");

  FlowTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 10) throw Error(ErrorCode::Io, "trace row has wrong field count");
    FlowRecord r;
    r.step = parse_long(f[0]);
    r.t = parse_double(f[1]);
    r.entropy = parse_double(f[2]);
    r.fisher = parse_double(f[3]);
    r.dh_fd = parse_optional(f[4]);
    r.poincare_c = parse_optional(f[5]);
    r.lsi_ratio = parse_optional(f[6]);
    r.rate1 = parse_optional(f[7]);
    r.rate2 = parse_optional(f[8]);
    r.row_marginal_err = parse_double(f[9]);
    trace.records.push_back(r);
  }
  if (trace.records.size() >= 2 && trace.records[1].step > 0) {
    trace.record_every = trace.records[1].step - trace.records[0].step;
    trace.gamma = trace.records[1].t / static_cast<double>(trace.records[1].step);
  }
  return trace;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sinkflow
