// Copyright 2026 The ratealloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "core/scenario_io.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "core/errors.hpp"

namespace ratealloc {
namespace {

// alpha sums in a scenario document may be off by this much.
constexpr double kParseAlphaTolerance = 1e-6;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

double parse_number(std::string_view text, int line, std::string_view field) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError(line, fmt::format("{}: '{}' is not a number", field, text));
  }
  return v;
}

double parse_positive(std::string_view text, int line, std::string_view field) {
  const double v = parse_number(text, line, field);
  if (!(v > 0.0)) throw ParseError(line, fmt::format("{} must be > 0 (got {})", field, text));
  return v;
}

AppSpec parse_app(std::string_view value, int line) {
  const auto tokens = split_ws(value);
  if (tokens.empty()) throw ParseError(line, "app: missing utility kind");
  const std::string_view kind = tokens[0];
  const bool sigmoid = kind == "sigmoid" || kind == "sigmoidal";
  const bool logarithmic = kind == "log" || kind == "logarithmic";
  if (!sigmoid && !logarithmic) throw ParseError(line, fmt::format("unknown utility kind '{}'", kind));

  std::map<std::string, double, std::less<>> params;
  for (std::size_t t = 1; t < tokens.size(); ++t) {
    const auto eq = tokens[t].find('=');
    if (eq == std::string_view::npos) throw ParseError(line, fmt::format("expected key=value, got '{}'", tokens[t]));
    const std::string key(tokens[t].substr(0, eq));
    const bool known = key == "alpha" || (sigmoid && (key == "a" || key == "b")) ||
                       (logarithmic && (key == "k" || key == "r_max"));
    if (!known) throw ParseError(line, fmt::format("unknown parameter '{}' for {} utility", key, kind));
    if (params.count(key)) throw ParseError(line, fmt::format("duplicate parameter '{}'", key));
    params[key] = parse_positive(tokens[t].substr(eq + 1), line, key);
  }
  auto need = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end()) throw ParseError(line, fmt::format("missing parameter '{}'", key));
    return it->second;
  };
  const double alpha = need("alpha");
  if (alpha > 1.0) throw ParseError(line, fmt::format("alpha must be <= 1 (got {})", alpha));
  if (sigmoid) return {Utility::sigmoidal(need("a"), need("b")), alpha};
  return {Utility::logarithmic(need("k"), need("r_max")), alpha};
}

void finish_ue(const UeSpec& ue, int header_line) {
  if (ue.apps.empty()) throw ParseError(header_line, "UE has no applications");
  double sum = 0.0;
  for (const auto& app : ue.apps) sum += app.alpha;
  if (std::abs(sum - 1.0) > kParseAlphaTolerance) {
    throw ParseError(header_line, fmt::format("alpha sum {} != 1", sum));
  }
}

void write_app(std::string& out, const AppSpec& app) {
  if (const auto* sig = app.utility.as_sigmoidal()) {
    out += fmt::format("app = sigmoid a={} b={} alpha={}\n", format_number(sig->a()), format_number(sig->b()),
                       format_number(app.alpha));
  } else {
    const auto* lg = app.utility.as_logarithmic();
    out += fmt::format("app = log k={} r_max={} alpha={}\n", format_number(lg->k()), format_number(lg->r_max()),
                       format_number(app.alpha));
  }
}

}  // namespace

std::string format_number(double v) { return fmt::format("{}", v); }

Scenario ScenarioFile::with_budget(std::optional<double> budget_override) const {
  const auto r = budget_override ? budget_override : budget;
  if (!r) throw DomainError("no budget given: declare `budget = R` in the scenario or pass one explicitly");
  Scenario s{ues, *r};
  validate(s);
  return s;
}

ScenarioFile parse_scenario(std::string_view text) {
  ScenarioFile file;
  UeSpec* current = nullptr;
  int current_header = 0;
  bool beta_seen = false;
  int line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line != "[ue]") throw ParseError(line_no, fmt::format("unknown section '{}'", line));
      if (current) finish_ue(*current, current_header);
      file.ues.emplace_back();
      current = &file.ues.back();
      current_header = line_no;
      beta_seen = false;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, fmt::format("expected key = value, got '{}'", line));
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));

    if (!current) {
      if (key != "budget") throw ParseError(line_no, fmt::format("unknown top-level key '{}'", key));
      if (file.budget) throw ParseError(line_no, "duplicate budget");
      file.budget = parse_positive(value, line_no, "budget");
    } else if (key == "beta") {
      if (beta_seen) throw ParseError(line_no, "duplicate beta");
      current->beta = parse_positive(value, line_no, "beta");
      beta_seen = true;
    } else if (key == "app") {
      current->apps.push_back(parse_app(value, line_no));
    } else {
      throw ParseError(line_no, fmt::format("unknown UE key '{}'", key));
    }
  }
  if (current) finish_ue(*current, current_header);
  if (file.ues.empty()) throw ParseError(0, "no UEs");
  return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open scenario file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), fmt::format("{}: {}", path.string(), e.detail()));
  }
}

std::string serialize_scenario(const ScenarioFile& s) {
  std::string out;
  if (s.budget) out += fmt::format("budget = {}\n", format_number(*s.budget));
  for (const auto& ue : s.ues) {
    out += fmt::format("\n[ue]\nbeta = {}\n", format_number(ue.beta));
    for (const auto& app : ue.apps) write_app(out, app);
  }
  return out;
}

std::string serialize_scenario(const Scenario& s) { return serialize_scenario(ScenarioFile{s.ues, s.budget}); }

const char* to_string(Mode m) {
  switch (m) {
    case Mode::kCentralized:
      return "centralized";
    case Mode::kDistributed:
      return "distributed";
    case Mode::kEuraBasic:
      return "eura-basic";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view text) {
  if (text == "centralized") return Mode::kCentralized;
  if (text == "distributed") return Mode::kDistributed;
  if (text == "eura-basic") return Mode::kEuraBasic;
  return std::nullopt;
}

ResultRow evaluate(const Scenario& s, Mode mode, const SimConfig& cfg, IterTrace* trace_out) {
  ResultRow row;
  row.budget = s.budget;
  row.mode = mode;
  for (const auto& ue : s.ues) row.app_rates.emplace_back(ue.apps.size(), std::nan(""));
  if (mode == Mode::kCentralized) {
    CentralizedResult res = centralized_allocate(s);
    row.status = to_string(RunStatus::kConverged);
    row.iterations = res.iterations;
    row.price = res.allocation.shadow_price;
    row.has_rates = true;
    row.ue_rates = res.allocation.ue_totals;
    row.app_rates = std::move(res.allocation.rates);
    row.kkt = res.kkt;
    for (double r : row.ue_rates) row.ue_bids.push_back(row.price * r);
    return row;
  }

  DistributedResult res = mode == Mode::kDistributed ? run_distributed(s, cfg) : run_distributed_basic(s, cfg);
  row.status = to_string(res.eura.status);
  row.iterations = res.eura.iterations;
  row.price = res.eura.price;
  row.ue_bids = res.eura.trace.final_bids;
  if (res.allocation) {
    row.has_rates = true;
    row.ue_rates = res.allocation->ue_totals;
    row.kkt = verify_kkt(s, *res.allocation);
    row.app_rates = std::move(res.allocation->rates);
  }
  if (trace_out) *trace_out = std::move(res.eura.trace);
  return row;
}

void SweepSpec::validate() const {
  if (!(std::isfinite(r_min) && r_min > 0.0)) throw DomainError(fmt::format("r_min must be > 0 (got {})", r_min));
  if (!(std::isfinite(r_step) && r_step > 0.0)) throw DomainError(fmt::format("r_step must be > 0 (got {})", r_step));
  if (!(std::isfinite(r_max) && r_max >= r_min)) throw DomainError(fmt::format("r_max must be >= r_min (got {})", r_max));
  sim.validate();
}

std::size_t SweepSpec::row_count() const {
  // The small slack keeps e.g. (200 - 10) / 5 from flooring to 37.999...
  return static_cast<std::size_t>(std::floor((r_max - r_min) / r_step + 1e-9)) + 1;
}

double SweepSpec::budget_at(std::size_t k) const { return r_min + static_cast<double>(k) * r_step; }

SweepResult run_sweep(const ScenarioFile& s, const SweepSpec& spec) {
  spec.validate();
  const std::size_t n = spec.row_count();
  // Fail fast on a broken scenario instead of recording n identical errors.
  (void)s.with_budget(spec.budget_at(0));

  SweepResult res;
  res.rows.resize(n);
  SimConfig sim = spec.sim;
  sim.record_trace = false;

  // Rows are independent; workers claim indices and write into their own slot,
  // so the output order never depends on scheduling.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      const double budget = spec.budget_at(k);
      ResultRow row;
      try {
        row = evaluate(s.with_budget(budget), spec.mode, sim);
      } catch (const std::exception& e) {
        for (const auto& ue : s.ues) row.app_rates.emplace_back(ue.apps.size(), std::nan(""));
        row.budget = budget;
        row.mode = spec.mode;
        row.status = "error";
        row.error = e.what();
      }
      res.rows[k] = std::move(row);
    }
  };
  unsigned jobs = spec.jobs ? spec.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return res;
}

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "R,mode,status,iters,p,ue,app,rate,bid\n";
  for (const auto& row : rows) {
    // Rows without rates (non-converged or failed) keep their shape with nan
    // rates so every budget contributes the same number of lines.
    for (std::size_t i = 0; i < row.app_rates.size(); ++i) {
      for (std::size_t j = 0; j < row.app_rates[i].size(); ++j) {
        const double r = row.has_rates ? row.app_rates[i][j] : std::nan("");
        out << format_number(row.budget) << ',' << to_string(row.mode) << ',' << row.status << ','
            << row.iterations << ',' << format_number(row.price) << ',' << i + 1 << ',' << j + 1 << ','
            << format_number(r) << ',' << format_number(row.price * r) << '\n';
      }
    }
  }
}

void write_trace_csv(std::ostream& out, const IterTrace& trace) {
  out << "n,p,ue,w,r\n";
  for (const auto& rec : trace.rounds) {
    for (std::size_t i = 0; i < rec.bids.size(); ++i) {
      out << rec.n << ',' << format_number(rec.price) << ',' << i + 1 << ',' << format_number(rec.bids[i]) << ','
          << format_number(rec.rates[i]) << '\n';
    }
  }
}

namespace {

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  fn(out);
  out.flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace

void emit_results(const SweepResult& res, const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& out) { write_results_csv(out, res.rows); });
}

void emit_results(const IterTrace& trace, const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& out) { write_trace_csv(out, trace); });
}

}  // namespace ratealloc
