#pragma once

// Experiment harness: configs, per-trial records, reports, and their JSON /
// CSV encodings. Every record carries the stream index that reproduces it;
// given the same config the emitted bytes are identical run to run.

#include <nlohmann/json.hpp>

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qform/free_combinatorics.hpp"
#include "qform/linalg.hpp"
#include "qform/lps_su2.hpp"
#include "qform/rng.hpp"
#include "qform/tensor_norms.hpp"

namespace qform::lab {

struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Subcommand { norm, randcheck, szarek, walks, absorb, lps, cn };
enum class OutputFormat { json, csv };

inline const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::norm: return "norm";
    case Subcommand::randcheck: return "randcheck";
    case Subcommand::szarek: return "szarek";
    case Subcommand::walks: return "walks";
    case Subcommand::absorb: return "absorb";
    case Subcommand::lps: return "lps";
    case Subcommand::cn: return "cn";
  }
  return "?";
}

inline const char* to_string(OutputFormat f) { return f == OutputFormat::json ? "json" : "csv"; }

// Contract thresholds checked inside a run.
inline constexpr double kGapSlack = 1e-4;
inline constexpr double kTriangleSlack = 1e-6;
inline constexpr double kHaagerupSlack = 1e-4;
inline constexpr double kLpsBlockSlack = 1e-6;
inline constexpr double kCrossSlack = 1e-3;
inline constexpr double kAbsorptionRelTol = 1e-8;

struct ExperimentConfig {
  Subcommand subcommand = Subcommand::norm;
  int n = 3;                 // family size; for walks, the number of free generators
  int dim = 4;
  std::int64_t prime = 5;
  int cutoff = -1;           // lps default 40, cn default 8
  int m_max = -1;            // szarek/absorb default 3, walks default 10
  int degree = 0;            // walks: tree degree; 0 counts identity patterns instead
  int trials = 1;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  int max_iter = 5000;
  int restarts = 3;
  OutputFormat format = OutputFormat::json;
  int jobs = 1;
  bool timing = false;       // wall_ms is 0 unless set, keeping reports byte-stable
};

inline int effective_cutoff(const ExperimentConfig& c) {
  if (c.cutoff >= 0) return c.cutoff;
  return c.subcommand == Subcommand::cn ? 8 : kDefaultCutoff;
}

inline int effective_m_max(const ExperimentConfig& c) {
  if (c.m_max >= 0) return c.m_max;
  return c.subcommand == Subcommand::walks ? 10 : 3;
}

inline void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw usage_error(msg);
  };
  require(c.n >= 1 && c.n <= 64, "--n must be in [1, 64]");
  require(c.dim >= 1 && c.dim <= 64, "--dim must be in [1, 64]");
  require(c.trials >= 0 && c.trials <= 100000, "--trials must be in [0, 100000]");
  require(c.jobs >= 1 && c.jobs <= 256, "--jobs must be in [1, 256]");
  require(c.tol > 0.0 && c.tol < 1.0, "--tol must be in (0, 1)");
  require(c.max_iter >= 1 && c.max_iter <= 10000000, "--max-iter must be in [1, 1e7]");
  require(c.restarts >= 0 && c.restarts <= 1000, "--restarts must be in [0, 1000]");
  const int m_max = effective_m_max(c);
  switch (c.subcommand) {
    case Subcommand::szarek:
      require(m_max >= 1 && m_max <= 50, "--m must be in [1, 50]");
      break;
    case Subcommand::absorb:
      require(m_max >= 1, "--m must be ≥ 1");
      require(std::pow(c.n, 2.0 * m_max) <= 1e6, "absorb: n^(2m) must not exceed 10^6");
      break;
    case Subcommand::walks:
      require(m_max >= 0 && m_max <= 5000, "--steps must be in [0, 5000]");
      require(c.degree == 0 || (c.degree >= 2 && c.degree <= 1000), "--degree must be 0 or in [2, 1000]");
      break;
    case Subcommand::lps:
    case Subcommand::cn: {
      require(c.prime >= 2 && c.prime <= 100000, "--prime must be in [2, 100000]");
      require(c.prime % 4 == 1 && is_prime(c.prime),
              "--prime must be a prime with p ≡ 1 (mod 4); got " + std::to_string(c.prime));
      const int cutoff = effective_cutoff(c);
      require(cutoff >= 1 && cutoff <= (c.subcommand == Subcommand::cn ? 40 : 200),
              c.subcommand == Subcommand::cn ? "--cutoff must be in [1, 40]" : "--cutoff must be in [1, 200]");
      break;
    }
    default:
      break;
  }
}

struct Record {
  std::size_t trial = 0;
  int n = 0;
  int dim = 0;
  std::optional<int> m;
  std::optional<int> m_prime;
  std::optional<double> value;
  std::optional<double> gap;
  std::optional<BigInt> count;
  std::optional<bool> converged;
  std::optional<int> iterations;
  std::uint64_t seed_index = 0;
  double wall_ms = 0.0;
  std::vector<std::pair<std::string, double>> extra;
  std::optional<std::string> violation;
};

struct Summary {
  std::size_t records = 0;
  std::optional<double> min_gap;
  std::optional<double> max_gap;
  std::optional<double> mean_gap;
  std::optional<double> max_value;
  bool contracts_held = true;
  std::vector<std::pair<std::size_t, std::string>> violations;  // (record index, message)
};

struct ExperimentReport {
  ExperimentConfig config;
  int family_size = 0;  // n used for reference constants
  std::vector<Record> records;
  Summary summary;
};

namespace detail {

inline SolverParams solver_params(const ExperimentConfig& c, std::uint64_t seed) {
  SolverParams p;
  p.tol = c.tol;
  p.max_iter = c.max_iter;
  p.restarts = c.restarts;
  p.seed = seed;
  return p;
}

/// Runs item(i) for i in [0, count) on `jobs` workers; results are merged in
/// index order regardless of completion order.
inline std::vector<Record> run_items(std::size_t count, int jobs, bool timing,
                                     const std::function<std::vector<Record>(std::size_t)>& item) {
  std::vector<std::vector<Record>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  auto work = [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    try {
      slots[i] = item(i);
    } catch (...) {
      errors[i] = std::current_exception();
      return;
    }
    if (timing) {
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      for (auto& r : slots[i]) r.wall_ms = ms;
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) work(i);
      });
    for (auto& t : pool) t.join();
  }
  std::vector<Record> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    for (auto& r : slots[i]) out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<Record> run_norm(const ExperimentConfig& c) {
  const double lower = free_lower_bound(c.n);
  return run_items(c.trials, c.jobs, c.timing, [&](std::size_t i) {
    Engine rng = make_stream(c.seed, i);
    const UnitaryFamily u = haar_family(c.n, c.dim, rng);
    const NormReport nr = min_tensor_norm(QuadraticForm::diagonal(u), solver_params(c, rng()));
    Record r;
    r.trial = i;
    r.n = c.n;
    r.dim = c.dim;
    r.value = nr.value;
    r.gap = nr.value - lower;
    r.converged = nr.converged;
    r.iterations = nr.iterations;
    r.seed_index = i;
    if (nr.value > c.n + kTriangleSlack)
      r.violation = "value exceeds the triangle bound n";
    else if (nr.converged && nr.value < lower - kGapSlack)
      r.violation = "converged value below 2√(n−1)";
    return std::vector<Record>{r};
  });
}

inline std::vector<Record> run_randcheck(const ExperimentConfig& c) {
  return run_items(c.trials, c.jobs, c.timing, [&](std::size_t i) {
    Engine rng = make_stream(c.seed, i);
    const UnitaryFamily u = haar_family(c.n, c.dim, rng);
    const GapReport g = theorem1_gap(u, solver_params(c, rng()));
    // Haagerup pair: even trials pair u with a Haar family of another size,
    // odd trials pair two Ginibre families.
    const Index other_dim = std::max<Index>(1, c.dim - 1);
    std::vector<ComplexMatrix> a, b;
    if (i % 2 == 0) {
      a = u.members();
      b = haar_family(c.n, other_dim, rng).members();
    } else {
      for (int k = 0; k < c.n; ++k) a.push_back(ginibre(c.dim, c.dim, rng) / std::sqrt(2.0 * c.dim));
      for (int k = 0; k < c.n; ++k) b.push_back(ginibre(other_dim, other_dim, rng) / std::sqrt(2.0 * other_dim));
    }
    const HaagerupReport h = haagerup_slack(a, b, solver_params(c, rng()));
    Record r;
    r.trial = i;
    r.n = c.n;
    r.dim = c.dim;
    r.value = g.norm.value;
    r.gap = g.gap;
    r.converged = g.norm.converged && h.converged;
    r.iterations = g.norm.iterations;
    r.seed_index = i;
    r.extra = {{"haagerup_slack", h.slack}, {"haagerup_lhs", h.lhs}};
    if (g.norm.converged && g.gap < -kGapSlack)
      r.violation = "negative 2√(n−1) gap";
    else if (h.converged && h.slack < -kHaagerupSlack)
      r.violation = "negative Haagerup slack";
    return std::vector<Record>{r};
  });
}

inline std::vector<Record> run_szarek(const ExperimentConfig& c) {
  const int m_max = effective_m_max(c);
  return run_items(c.trials, c.jobs, c.timing, [&](std::size_t i) {
    Engine rng = make_stream(c.seed, i);
    const UnitaryFamily u = haar_family(c.n, c.dim, rng);
    const HSMatrix t(random_psd_unit(c.dim, rng));
    std::vector<Record> out;
    for (int m = 1; m <= m_max; ++m) {
      const SzarekReport s = szarek_moment(u, t, m);
      const double count = s.count.convert_to<double>();
      Record r;
      r.trial = i;
      r.n = c.n;
      r.dim = c.dim;
      r.m = m;
      r.value = s.lhs;
      r.gap = s.lhs - count;
      r.count = s.count;
      r.seed_index = i;
      if (s.lhs < count * (1.0 - 1e-9) - 1e-9) r.violation = "moment below the identity-pattern count";
      out.push_back(std::move(r));
    }
    return out;
  });
}

inline std::vector<Record> run_walks(const ExperimentConfig& c) {
  const int steps = effective_m_max(c);
  const bool tree = c.degree > 0;
  const std::vector<BigInt> counts =
      tree ? tree_return_series(c.degree, steps) : identity_pattern_series(c.n, steps);
  const double target = tree ? free_lower_bound(c.degree) : free_lower_bound(c.n);
  std::vector<Record> out;
  for (int m = 0; m <= steps; ++m) {
    Record r;
    r.trial = static_cast<std::size_t>(m);
    r.n = tree ? c.degree : c.n;
    r.dim = 1;
    r.m = m;
    r.count = counts[m];
    if (m >= 1) {
      const double v = std::sqrt(growth_estimate(std::span<const BigInt>(counts.data() + m - 1, 2)));
      r.value = v;
      r.gap = v - target;
    }
    r.seed_index = static_cast<std::uint64_t>(m);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<Record> run_absorb(const ExperimentConfig& c) {
  const int m_max = effective_m_max(c);
  return run_items(c.trials, c.jobs, c.timing, [&](std::size_t i) {
    Engine rng = make_stream(c.seed, i);
    const UnitaryFamily u = haar_family(c.n, c.dim, rng);
    std::vector<Record> out;
    for (int m = 1; m <= m_max; ++m) {
      const AbsorptionReport a = moment_absorption_check(u, m);
      const double count = a.count.convert_to<double>();
      Record r;
      r.trial = i;
      r.n = c.n;
      r.dim = c.dim;
      r.m = m;
      r.value = a.moment;
      r.gap = a.moment - count;
      r.count = a.count;
      r.seed_index = i;
      if (std::abs(a.moment - count) > kAbsorptionRelTol * count)
        r.violation = "moment differs from the identity-pattern count";
      out.push_back(std::move(r));
    }
    return out;
  });
}

inline std::vector<Record> run_lps(const ExperimentConfig& c) {
  const int cutoff = effective_cutoff(c);
  const RepresentationTower tower = lps_tower(c.prime, cutoff);
  const int n = static_cast<int>(tower.generators.size());
  const double bound = free_lower_bound(n);
  return run_items(cutoff, c.jobs, c.timing, [&](std::size_t i) {
    const int m = static_cast<int>(i) + 1;
    const double v = rho_block_norm(tower, m);
    Record r;
    r.trial = i;
    r.n = n;
    r.dim = m + 1;
    r.m = m;
    r.value = v;
    r.gap = v - bound;
    r.seed_index = i;
    if (v > bound + kLpsBlockSlack) r.violation = "block norm exceeds 2√(n−1)";
    return std::vector<Record>{r};
  });
}

inline std::vector<Record> run_cn(const ExperimentConfig& c) {
  const int cutoff = effective_cutoff(c);
  const RepresentationTower tower = lps_tower(c.prime, cutoff);
  const int n = static_cast<int>(tower.generators.size());
  const double bound = free_lower_bound(n);
  const std::size_t side = static_cast<std::size_t>(cutoff) + 1;
  return run_items(side * side, c.jobs, c.timing, [&](std::size_t i) {
    const int m = static_cast<int>(i / side);
    const int mp = static_cast<int>(i % side);
    Engine rng = make_stream(c.seed, i);
    const NormReport nr = cross_tensor_norm(tower, m, mp, solver_params(c, rng()));
    Record r;
    r.trial = i;
    r.n = n;
    r.dim = (m + 1) * (mp + 1);
    r.m = m;
    r.m_prime = mp;
    r.value = nr.value;
    r.gap = nr.value - bound;
    r.converged = nr.converged;
    r.iterations = nr.iterations;
    r.seed_index = i;
    if (m != mp && nr.value > bound + kCrossSlack)
      r.violation = "cross term exceeds 2√(n−1)";
    else if (m == mp && nr.value < bound - kCrossSlack)
      r.violation = "diagonal term below 2√(n−1)";
    return std::vector<Record>{r};
  });
}

inline Summary summarize(const std::vector<Record>& records) {
  Summary s;
  s.records = records.size();
  double sum = 0.0;
  std::size_t gaps = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    if (r.gap) {
      s.min_gap = s.min_gap ? std::min(*s.min_gap, *r.gap) : *r.gap;
      s.max_gap = s.max_gap ? std::max(*s.max_gap, *r.gap) : *r.gap;
      sum += *r.gap;
      ++gaps;
    }
    if (r.value) s.max_value = s.max_value ? std::max(*s.max_value, *r.value) : *r.value;
    if (r.violation) {
      s.contracts_held = false;
      s.violations.emplace_back(i, *r.violation);
    }
  }
  if (gaps > 0) s.mean_gap = sum / static_cast<double>(gaps);
  return s;
}

}  // namespace detail

/// Dispatches a validated config. Throws usage_error on invalid configs.
inline ExperimentReport run(const ExperimentConfig& config) {
  validate(config);
  ExperimentReport report;
  report.config = config;
  report.family_size = config.n;
  switch (config.subcommand) {
    case Subcommand::norm: report.records = detail::run_norm(config); break;
    case Subcommand::randcheck: report.records = detail::run_randcheck(config); break;
    case Subcommand::szarek: report.records = detail::run_szarek(config); break;
    case Subcommand::walks:
      report.records = detail::run_walks(config);
      if (config.degree > 0) report.family_size = config.degree;
      break;
    case Subcommand::absorb: report.records = detail::run_absorb(config); break;
    case Subcommand::lps:
      report.records = detail::run_lps(config);
      report.family_size = static_cast<int>(config.prime + 1);
      break;
    case Subcommand::cn:
      report.records = detail::run_cn(config);
      report.family_size = static_cast<int>(config.prime + 1);
      break;
  }
  report.summary = detail::summarize(report.records);
  return report;
}

inline int exit_status(const ExperimentReport& report) { return report.summary.contracts_held ? 0 : 1; }

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

/// Shortest decimal that round-trips to the same double.
inline std::string shortest(double x) {
  if (!std::isfinite(x)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

using ojson = nlohmann::ordered_json;

template <class T>
ojson opt(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

inline ojson config_json(const ExperimentConfig& c) {
  ojson j;
  j["subcommand"] = to_string(c.subcommand);
  j["n"] = c.n;
  j["dim"] = c.dim;
  j["prime"] = c.prime;
  j["cutoff"] = effective_cutoff(c);
  j["m_max"] = effective_m_max(c);
  j["degree"] = c.degree;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["tol"] = c.tol;
  j["max_iter"] = c.max_iter;
  j["restarts"] = c.restarts;
  j["format"] = to_string(c.format);
  j["timing"] = c.timing;
  return j;
}

}  // namespace detail

inline std::string to_json(const ExperimentReport& report) {
  using detail::ojson;
  ojson j;
  j["schema"] = "qform-lab-report/1";
  j["config"] = detail::config_json(report.config);
  const double n = report.family_size;
  j["reference"] = {{"family_size", report.family_size},
                    {"s_n", free_lower_bound(report.family_size)},
                    {"kesten_2n", 2.0 * std::sqrt(2.0 * n - 1.0)},
                    {"upper_n", n}};
  ojson records = ojson::array();
  for (const Record& r : report.records) {
    ojson x;
    x["trial"] = r.trial;
    x["n"] = r.n;
    x["dim"] = r.dim;
    x["m"] = detail::opt(r.m);
    if (report.config.subcommand == Subcommand::cn) x["m_prime"] = detail::opt(r.m_prime);
    x["value"] = detail::opt(r.value);
    x["gap"] = detail::opt(r.gap);
    x["count"] = r.count ? ojson(r.count->str()) : ojson(nullptr);
    x["converged"] = detail::opt(r.converged);
    x["iterations"] = detail::opt(r.iterations);
    x["seed_index"] = r.seed_index;
    x["wall_ms"] = r.wall_ms;
    ojson extra = ojson::object();
    for (const auto& [k, v] : r.extra) extra[k] = v;
    x["extra"] = std::move(extra);
    records.push_back(std::move(x));
  }
  j["records"] = std::move(records);
  const Summary& s = report.summary;
  ojson viol = ojson::array();
  for (const auto& [idx, msg] : s.violations) viol.push_back({{"record", idx}, {"message", msg}});
  j["summary"] = {{"records", s.records},
                  {"min_gap", detail::opt(s.min_gap)},
                  {"max_gap", detail::opt(s.max_gap)},
                  {"mean_gap", detail::opt(s.mean_gap)},
                  {"max_value", detail::opt(s.max_value)},
                  {"contracts_held", s.contracts_held},
                  {"violations", std::move(viol)}};
  return j.dump(2) + "\n";
}

inline std::string to_csv(const ExperimentReport& report) {
  const bool cn = report.config.subcommand == Subcommand::cn;
  std::string out = "trial,n,dim,m,value,gap,count,converged,iterations,seed_index,wall_ms";
  out += cn ? ",m_prime\n" : "\n";
  auto num = [](const std::optional<double>& v) { return v ? shortest(*v) : std::string(); };
  auto integer = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  for (const Record& r : report.records) {
    out += std::to_string(r.trial) + ',' + std::to_string(r.n) + ',' + std::to_string(r.dim) + ',' +
           integer(r.m) + ',' + num(r.value) + ',' + num(r.gap) + ',' +
           (r.count ? '"' + r.count->str() + '"' : std::string()) + ',' +
           (r.converged ? (*r.converged ? "true" : "false") : "") + ',' + integer(r.iterations) + ',' +
           std::to_string(r.seed_index) + ',' + shortest(r.wall_ms);
    if (cn) out += ',' + integer(r.m_prime);
    out += '\n';
  }
  return out;
}

inline std::string emit(const ExperimentReport& report, OutputFormat format) {
  return format == OutputFormat::json ? to_json(report) : to_csv(report);
}

/// Writes to a sibling temporary file, then renames over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open " + tmp.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f) throw io_error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw io_error("cannot move report into " + path.string());
  }
}

}  // namespace qform::lab
