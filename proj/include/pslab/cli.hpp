#pragma once

// Batch experiment runner: parses a config (JSON file and/or flags),
// dispatches one verification or scan suite, and writes
// <outdir>/<suite>/<timestamp>/{manifest.json, report.json, table.csv,
// table.schema.json}. Reruns with the same config and seed are
// byte-identical apart from the timestamp.

#include <atomic>
#include <chrono>
#include <thread>
#include <utility>

#include <CLI11.hpp>

#include "pslab/commutators.hpp"
#include "pslab/random_fields.hpp"
#include "pslab/report.hpp"
#include "pslab/version.hpp"

namespace pslab {

// --- config -----------------------------------------------------------

struct ExperimentConfig {
  std::string mode;     // "verify" or "scan"
  std::string suite;    // extension | parity | ... | strichartz | ...
  std::string geometry = "flat";
  int n = 2;
  int size = 64;
  std::string s = "0";  // rational regularity, e.g. "1/2"
  std::string q = "";   // optional: pin one space exponent ("inf" or a rational)
  int pairs = 3;
  int family = 8;
  double T = 1.0;
  int M = 64;
  double delta = 1.0;
  int charts = 2;
  unsigned seed = 12345;
  int workers = 1;
  std::string outdir;

  ordered_json to_json() const {
    ordered_json j;
    j["mode"] = mode;
    j["suite"] = suite;
    j["geometry"] = geometry;
    j["n"] = n;
    j["size"] = size;
    j["s"] = s;
    j["q"] = q;
    j["pairs"] = pairs;
    j["family"] = family;
    j["T"] = T;
    j["M"] = M;
    j["delta"] = delta;
    j["charts"] = charts;
    j["seed"] = seed;
    j["workers"] = workers;
    return j;
  }

  void load_json(const std::string& path) {
    std::ifstream is(path);
    detail::require(is.good(), "config: cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    auto get = [&](const char* key, auto& slot) {
      if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("mode", mode);
    get("suite", suite);
    get("geometry", geometry);
    get("n", n);
    get("size", size);
    get("s", s);
    get("q", q);
    get("pairs", pairs);
    get("family", family);
    get("T", T);
    get("M", M);
    get("delta", delta);
    get("charts", charts);
    get("seed", seed);
    get("workers", workers);
    get("outdir", outdir);
  }
};

inline Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(std::stoll(text));
  return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
}

// First offending key wins; the message names it.
inline void validate_config(const ExperimentConfig& c) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("config key '" + key + "': " + why);
  };
  static const std::vector<std::string> verify_suites{"extension", "parity", "partition", "propagator",
                                                      "commutators"};
  static const std::vector<std::string> scan_suites{"strichartz", "smoothing", "strichartz-smoothing",
                                                    "endpoint-pipeline", "k-functional"};
  if (c.mode != "verify" && c.mode != "scan") fail("mode", "must be 'verify' or 'scan'");
  const auto& allowed = c.mode == "verify" ? verify_suites : scan_suites;
  if (std::find(allowed.begin(), allowed.end(), c.suite) == allowed.end())
    fail("suite", "unknown suite '" + c.suite + "' for mode '" + c.mode + "'");
  if (c.geometry != "flat" && c.geometry != "sin" && c.geometry != "bump" && c.geometry != "circle" &&
      c.geometry != "perturbed_circle")
    fail("geometry", "unknown catalog entry '" + c.geometry + "'");
  if (c.n < 1 || c.n > 3) fail("n", "dimension must be 1, 2 or 3");
  if (c.size < 8 || !detail::is_pow2(c.size)) fail("size", "grid size must be a power of two >= 8");
  Rational s(0);
  try {
    s = parse_rational(c.s);
  } catch (...) {
    fail("s", "not a rational: '" + c.s + "'");
  }
  if (c.suite == "strichartz") {
    if (s < Rational(0) || s >= Rational(c.n, 2)) fail("s", "admissibility requires 0 <= s < n/2");
    if (!c.q.empty()) {
      Rational invq(0);
      if (c.q == "inf") {
        if (c.n == 2)
          fail("q", "q = inf with n = 2 is excluded by the admissibility rule (2/p + n/q = n/2 - s needs q < inf)");
      } else {
        Rational qq(1);
        try {
          qq = parse_rational(c.q);
        } catch (...) {
          fail("q", "not a rational: '" + c.q + "'");
        }
        if (!(qq > Rational(0))) fail("q", "exponent must be positive");
        invq = Rational(1) / qq;
      }
      Rational invp = (Rational(c.n, 2) - s - Rational(c.n) * invq) / Rational(2);
      if (invp < Rational(0) || invp > Rational(1, 2))
        fail("q", "no admissible p in [2, inf] pairs with q = " + c.q + " at s = " + c.s);
    }
  }
  if (c.pairs < 0) fail("pairs", "must be nonnegative");
  if (c.family < 1) fail("family", "need at least one family member");
  if (c.T <= 0.0) fail("T", "horizon must be positive");
  if (c.M < 16) fail("M", "need at least 16 steps");
  if (c.delta <= 0.0) fail("delta", "chart radius must be positive");
  if (c.charts < 1) fail("charts", "need at least one chart");
  if (c.workers < 1) fail("workers", "need at least one worker");
}

// --- tiny worker pool --------------------------------------------------

// Index-parallel map with a bounded pool; results land in pre-sized slots so
// the merged report is deterministic regardless of scheduling.
template <class Fn>
inline void parallel_for(int count, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// --- suite results ------------------------------------------------------

struct CheckLine {
  std::string name;
  bool passed;
  double value;
  double bound;
};

struct SuiteResult {
  ordered_json report;
  std::vector<RatioReport> tables;
  std::vector<CheckLine> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  void check_le(const std::string& name, double value, double bound) {
    checks.push_back({name, value <= bound, value, bound});
  }
  void check(const std::string& name, bool ok, double value = 0.0) { checks.push_back({name, ok, value, 0.0}); }
};

// --- suites: verify ------------------------------------------------------

inline SuiteResult suite_verify_extension(const ExperimentConfig& c) {
  SuiteResult res;
  GridSpec spec = GridSpec::cubic(std::max(2, c.n), c.size);
  BoundaryGraph graph = BoundaryGraph::by_name(c.geometry == "flat" ? "flat" : c.geometry);
  PullbackCoefficients coeffs = pullback_coefficients(graph, detail::transverse_spec(spec));

  double tol = c.geometry == "flat" ? 1e-10 : 1e-8;
  ordered_json runs = ordered_json::array();
  double prev = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  for (int size : {c.size / 4, c.size / 2, c.size}) {
    if (size < 16) continue;
    GridSpec s = GridSpec::cubic(std::max(2, c.n), size);
    PullbackCoefficients cf = pullback_coefficients(graph, detail::transverse_spec(s));
    HalfField g = halfspace_bump(s, c.seed);
    CommutationReport rep = verify_commutation(g, cf);
    runs.push_back(ordered_json{{"size", size},
                                {"residual_rel", rep.residual_rel},
                                {"alias_excess", rep.alias_excess},
                                {"support_leakage", rep.support_leakage}});
    decreasing = decreasing && rep.residual_rel < prev;
    prev = rep.residual_rel;
  }
  res.report["suite"] = "verify extension";
  res.report["geometry"] = graph.name;
  res.report["runs"] = runs;
  res.check_le("commutation residual at full size", prev, tol);
  res.check("residual decreases across sizes", decreasing, prev);

  RatioReport table;
  table.inequality = "extension commutation residual";
  table.family = "bump data, geometry " + graph.name;
  for (auto& r : runs) {
    RatioMember m;
    m.label = "size " + std::to_string((int)r["size"]);
    m.lhs = (double)r["residual_rel"];
    m.rhs = 1.0;
    table.push(std::move(m));
  }
  res.tables.push_back(std::move(table));
  return res;
}

inline SuiteResult suite_verify_parity(const ExperimentConfig& c) {
  SuiteResult res;
  GridSpec spec = GridSpec::cubic(std::max(2, c.n), c.size);
  double worst = 0.0;
  ordered_json fields = ordered_json::array();
  for (int member = 0; member < c.family; ++member) {
    DNDecomposition dn = random_dn_data(spec, spec.sizes[0] / 4, c.seed + (unsigned)member);
    double field_worst = 0.0;
    for (const auto& rel : verify_parity_relations(dn)) field_worst = std::max(field_worst, rel.max_error);
    fields.push_back(ordered_json{{"member", member}, {"max_error", field_worst}});
    worst = std::max(worst, field_worst);
  }
  res.report["suite"] = "verify parity";
  res.report["members"] = fields;
  res.report["worst"] = worst;
  res.check_le("all parity relations", worst, 1e-9);
  return res;
}

inline SuiteResult suite_verify_partition(const ExperimentConfig& c) {
  SuiteResult res;
  GridSpec spec = GridSpec::cubic(2, c.size);
  BoundaryCurve curve = BoundaryCurve::by_name(c.geometry == "flat" ? "circle" : c.geometry);
  // charts must overlap: radius at least 1.5x the center spacing
  int charts = std::max(c.charts, 8);
  double delta = std::max(c.delta, 1.5 * 2.0 * pi / charts);
  PartitionOfUnity part = build_partition(curve, spec, delta, charts);
  double identity = partition_identity_error(part);
  res.report["suite"] = "verify partition";
  res.report["curve"] = curve.name;
  res.report["identity_error"] = identity;
  res.report["min_cover"] = part.min_cover;
  res.check_le("partition identity on collar", identity, 1e-12);
  res.check("denominator lower bound", part.min_cover >= 1e-8, part.min_cover);
  return res;
}

inline SuiteResult suite_verify_propagator(const ExperimentConfig& c) {
  SuiteResult res;
  GridSpec spec = GridSpec::cubic(2, c.size);
  TimeGrid tg(c.T, c.M);
  HalfField g = halfspace_bump(spec, c.seed);
  Field carrier = parity_periodize(g, BC::Dirichlet);
  EvolutionRecord rec = evolve_record(carrier, tg, BC::Free);
  double trace = 0.0;
  for (const Field& u : rec.snapshots) trace = std::max(trace, boundary_trace_max(u));
  double scale = linf_norm(rec.snapshots[0]);
  res.report["suite"] = "verify propagator";
  res.report["dirichlet_trace"] = trace;
  res.report["mass_drift"] = rec.mass_drift();
  res.check_le("dirichlet trace", trace / scale, 1e-10);
  res.check_le("mass drift", rec.mass_drift(), 1e-10);
  return res;
}

inline SuiteResult suite_verify_commutators(const ExperimentConfig& c) {
  SuiteResult res;
  GridSpec spec = GridSpec::cubic(2, std::min(c.size, 64));
  CommutatorExponents exps(2, Rational(3, 5), Rational(4, 5), Rational(1, 4));
  double worst_dec = 0.0, worst_const = 0.0;
  for (int member = 0; member < c.family; ++member) {
    Field f = random_band_limited(spec, spec.sizes[0] / 4, c.seed + (unsigned)member, true);
    WeightCommutatorResult wr = commutator_weight_grad(f, exps);
    worst_dec = std::max(worst_dec, wr.decomposition_err / std::max(1.0, linf_norm(f)));
    Field ones = Field::sample(spec, [](std::span<const double>) { return cplx{1.0, 0.0}; });
    worst_const = std::max(worst_const, linf_norm(commutator_Ds(ones, f, 0.5)));
  }
  res.report["suite"] = "verify commutators";
  res.report["decomposition_err"] = worst_dec;
  res.report["constant_commutator"] = worst_const;
  res.check_le("two-term decomposition", worst_dec, 1e-9);
  res.check_le("constant symbols commute", worst_const, 1e-12);
  return res;
}

// --- suites: scan -------------------------------------------------------

inline SuiteResult suite_scan_strichartz(const ExperimentConfig& c) {
  SuiteResult res;
  Rational s = parse_rational(c.s);
  std::vector<AdmissibleTriple> triples;
  if (c.q.empty()) {
    triples = enumerate_admissible(c.n, s, c.pairs);
  } else {
    Exponent q = c.q == "inf" ? Exponent::infinity() : Exponent::of(parse_rational(c.q));
    Rational invp = (Rational(c.n, 2) - s - Rational(c.n) * q.inv) / Rational(2);
    triples.emplace_back(c.n, s, Exponent{invp}, q);
  }
  GridSpec spec = GridSpec::cubic(c.n, std::min(c.size, c.n == 3 ? 32 : c.size));
  TimeGrid tg(c.T, c.M);

  std::mt19937_64 rng(c.seed);
  std::vector<StrichartzInput> family;
  std::uniform_real_distribution<double> width(std::log(1.0 / 8.0), std::log(8.0));
  std::uniform_real_distribution<double> pos(-0.5, 0.5);
  for (int i = 0; i < c.family; ++i) {
    double sigma = 0.35 * std::exp(width(rng) * 0.25);
    std::vector<double> center(spec.n);
    for (int a = 0; a < spec.n; ++a) center[(std::size_t)a] = (0.5 + 0.1 * pos(rng)) * spec.box[a];
    family.push_back({"gauss[" + std::to_string(i) + "]", gaussian_field(spec, sigma, center),
                      {{"sigma", sigma}}});
  }

  ordered_json all = ordered_json::array();
  for (const auto& triple : triples) {
    RatioReport rep;  // one report per admissible pair
    rep.inequality = "strichartz " + triple.str();
    rep.family = "gaussians[" + std::to_string(c.family) + "]";
    rep.metadata["T"] = tg.T;
    rep.metadata["M"] = tg.M;
    std::vector<RatioMember> slots((std::size_t)c.family);
    parallel_for(c.family, c.workers, [&](int i) {
      slots[(std::size_t)i] = strichartz_ratio_member(family[(std::size_t)i], triple, BC::Free, tg);
    });
    for (auto& m : slots) rep.push(std::move(m));
    all.push_back(ratio_report_json(rep));
    res.check("sup ratio finite: " + triple.str(), std::isfinite(rep.sup_ratio()), rep.sup_ratio());
    res.tables.push_back(std::move(rep));
  }
  res.report["suite"] = "scan strichartz";
  res.report["reports"] = all;
  return res;
}

inline SuiteResult suite_scan_smoothing(const ExperimentConfig& c) {
  SuiteResult res;
  GridSpec spec({std::max(c.size, 256), std::max(32, c.size / 8)}, {2.0 * pi, 2.0 * pi});
  TimeGrid tg(c.T, c.M);
  Field chi = bump_field(spec, {pi * 0.5, pi}, 1.2);
  std::mt19937_64 rng(c.seed);
  auto data_for_j = [&](int j) {
    DNDecomposition d = DNDecomposition::zeros(spec);
    int k_lo = 1 << (j - 1), k_hi = std::min(1 << (j + 1), spec.sizes[0] / 2 - 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = k_lo; k <= k_hi; ++k)
      for (std::size_t t = 0; t < d.slab() && t < 4; ++t) d.sin_c[(std::size_t)k][t] = cplx{gauss(rng), gauss(rng)};
    return d.odd_field();
  };
  auto sweep = smoothing_frequency_sweep(2, 6, chi, 0.0, BC::Dirichlet, tg, data_for_j);

  RatioReport rep;
  rep.inequality = "local smoothing gain (s+1/2 over H^s)";
  rep.family = "dyadic shells j=2..6";
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& e : sweep) {
    RatioMember m = e.member;
    m.params["j"] = e.j;
    m.params["normalized"] = e.normalized;
    rep.push(std::move(m));
    lo = std::min(lo, e.normalized);
    hi = std::max(hi, e.normalized);
  }
  double mid = 0.5 * (lo + hi);
  res.report["suite"] = "scan smoothing";
  res.report["normalized_band"] = ordered_json{{"lo", lo}, {"hi", hi}};
  res.check("normalized ratios within +-20% band", hi <= 1.2 * mid && lo >= 0.8 * mid, (hi - lo) / mid);
  res.tables.push_back(std::move(rep));
  return res;
}

inline SuiteResult suite_scan_strichartz_smoothing(const ExperimentConfig& c) {
  SuiteResult res;
  GridSpec spec = GridSpec::cubic(c.n >= 3 ? 3 : 2, std::min(c.size, 32));
  TimeGrid tg(c.T, std::min(c.M, 64));
  XNorm xn = spec.n >= 3 ? XNorm::endpoint(spec.n) : XNorm{4.0, 4.0};

  Field profile = bump_field(spec, {}, 1.0);
  std::vector<Field> F;
  for (int m = 0; m <= tg.M; ++m) {
    Field f = profile;
    f *= std::polar(1.0, 0.3 * tg.instant(m));
    F.push_back(std::move(f));
  }
  RatioReport rep;
  rep.inequality = "strichartz-smoothing (forced endpoint)";
  rep.family = "bump forcing, s0 sweep";
  double prev_rhs = 0.0;
  bool monotone = true;
  for (double s0 : {0.6, 0.8, 1.0}) {
    StrichartzSmoothingResult r = strichartz_smoothing_ratio(F, s0, xn, tg, "s0=" + std::to_string(s0));
    monotone = monotone && r.member.rhs >= prev_rhs;
    prev_rhs = r.member.rhs;
    rep.push(std::move(r.member));
  }
  res.report["suite"] = "scan strichartz-smoothing";
  res.check("RHS monotone in s0", monotone, prev_rhs);
  res.check("ratios finite", std::isfinite(rep.sup_ratio()), rep.sup_ratio());
  res.tables.push_back(std::move(rep));
  return res;
}

inline SuiteResult suite_scan_endpoint_pipeline(const ExperimentConfig& c) {
  SuiteResult res;
  GridSpec spec({std::min(c.size, 64), std::min(c.size / 2, 32), std::min(c.size / 2, 32)},
                {2.0 * pi, 2.0 * pi, 2.0 * pi});
  TimeGrid tg(std::min(c.T, 0.5), std::max(c.M, 128));
  HalfspacePartition part = halfspace_boundary_partition(spec, std::max(c.delta, 1.6), c.charts);
  DNDecomposition data = random_dn_data(spec, 4, c.seed);
  EndpointPipelineReport rep = endpoint_pipeline(data.odd_field(), part, tg, 6.0);

  res.report["suite"] = "scan endpoint-pipeline";
  res.report["partition_identity_err"] = rep.partition_identity_err;
  res.report["collar_agreement"] = rep.collar_agreement;
  res.report["source_two_form_err"] = rep.source_two_form_err;
  res.report["duhamel_residual"] = rep.duhamel_residual;
  res.report["I_ratio"] = rep.I_ratio;
  res.report["II_ratio"] = rep.II_ratio;
  res.report["endpoint_ratio"] = rep.endpoint_ratio;
  res.check_le("partition identity", rep.partition_identity_err, 1e-10);
  res.check_le("duhamel residual", rep.duhamel_residual, 5e-3);
  RatioReport table;
  table.inequality = "endpoint pipeline per-chart ratios";
  table.family = "charts[" + std::to_string(c.charts) + "]";
  for (std::size_t k = 0; k < rep.endpoint_ratio.size(); ++k) {
    RatioMember m;
    m.label = "chart " + std::to_string(k);
    m.lhs = rep.endpoint_ratio[k];
    m.rhs = 1.0;
    m.params = {{"I", rep.I_ratio[k]}, {"II", rep.II_ratio[k]}};
    table.push(std::move(m));
  }
  res.tables.push_back(std::move(table));
  return res;
}

inline SuiteResult suite_scan_k_functional(const ExperimentConfig& c) {
  SuiteResult res;
  GridSpec spec = GridSpec::cubic(2, std::min(c.size, 64));
  RatioReport rep;
  rep.inequality = "K-functional interpolation vs H^1";
  rep.family = "band-limited family[" + std::to_string(c.family) + "]";
  bool shape_ok = true;
  for (int i = 0; i < c.family; ++i) {
    Field f = random_band_limited(spec, spec.sizes[0] / 4, c.seed + (unsigned)i);
    KFunctionalCurve curve = k_functional_curve(f);
    for (std::size_t t = 0; t + 1 < curve.lambda.size(); ++t) shape_ok = shape_ok && curve.K[t + 1] >= curve.K[t] - 1e-12;
    RatioMember m;
    m.label = "member " + std::to_string(i);
    m.lhs = curve.interpolation_norm(1.0);
    m.rhs = sobolev_norm(f, 1.0);
    rep.push(std::move(m));
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& m : rep.members) {
    lo = std::min(lo, m.ratio);
    hi = std::max(hi, m.ratio);
  }
  res.report["suite"] = "scan k-functional";
  res.report["ratio_lo"] = lo;
  res.report["ratio_hi"] = hi;
  res.check("K monotone on the lambda grid", shape_ok);
  res.check("comparability within [1/4, 4]", lo >= 0.25 && hi <= 4.0, hi);
  res.tables.push_back(std::move(rep));
  return res;
}

// --- runner ---------------------------------------------------------------

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

inline SuiteResult dispatch_suite(const ExperimentConfig& c) {
  static const std::map<std::string, SuiteResult (*)(const ExperimentConfig&)> registry{
      {"verify/extension", suite_verify_extension},
      {"verify/parity", suite_verify_parity},
      {"verify/partition", suite_verify_partition},
      {"verify/propagator", suite_verify_propagator},
      {"verify/commutators", suite_verify_commutators},
      {"scan/strichartz", suite_scan_strichartz},
      {"scan/smoothing", suite_scan_smoothing},
      {"scan/strichartz-smoothing", suite_scan_strichartz_smoothing},
      {"scan/endpoint-pipeline", suite_scan_endpoint_pipeline},
      {"scan/k-functional", suite_scan_k_functional},
  };
  auto it = registry.find(c.mode + "/" + c.suite);
  detail::require(it != registry.end(), "config key 'suite': no such suite " + c.suite);
  return it->second(c);
}

inline int run(ExperimentConfig config) {
  try {
    validate_config(config);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (config.outdir.empty()) {
    const char* env = std::getenv("PSLAB_OUT");
    config.outdir = env ? env : "runs";
  }

  std::string stamp = utc_timestamp();
  std::filesystem::path dir = std::filesystem::path(config.outdir) / config.suite / stamp;
  std::filesystem::create_directories(dir);

  SuiteResult result;
  std::string failure;
  try {
    result = dispatch_suite(config);
  } catch (const std::exception& e) {
    failure = e.what();
  }

  // manifest: config echo, hash (timestamp excluded), versions, seed
  ordered_json manifest;
  manifest["tool"] = "pslab";
  manifest["version"] = kVersion;
  manifest["timestamp"] = stamp;
  manifest["seed"] = config.seed;
  manifest["config"] = config.to_json();
  manifest["config_hash"] = fnv1a(config.to_json().dump());
  ordered_json versions = ordered_json::object();
  for (auto [mod, ver] : kModuleVersions) versions[mod] = ver;
  manifest["modules"] = versions;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';

  ordered_json report = result.report;
  report["seed"] = config.seed;
  ordered_json checks = ordered_json::array();
  for (const auto& c : result.checks)
    checks.push_back(ordered_json{{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"bound", c.bound}});
  report["checks"] = checks;
  if (!failure.empty()) report["error"] = failure;
  std::ofstream(dir / "report.json") << report.dump(2) << '\n';

  {
    std::ofstream csv(dir / "table.csv");
    if (result.tables.empty()) {
      csv << "inequality,member,lhs,rhs,ratio\n";
    } else {
      bool first = true;
      for (const auto& t : result.tables) {
        std::ostringstream block;
        write_ratio_csv(t, block);
        std::string text = block.str();
        if (!first) text = text.substr(text.find('\n') + 1);  // one header
        csv << text;
        first = false;
      }
    }
    std::ofstream schema(dir / "table.schema.json");
    write_csv_schema(schema);
  }

  for (const auto& c : result.checks)
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << config.mode << ' ' << config.suite << ": " << c.name
              << " (value " << c.value << (c.bound > 0.0 ? ", bound " + format_double(c.bound) : "") << ")\n";
  std::cout << "artifacts: " << dir.string() << "\n";

  if (!failure.empty()) {
    std::cerr << "suite error: " << failure << "\n";
    return 1;
  }
  return result.passed() ? 0 : 1;
}

inline int cli_main(int argc, char** argv) {
  CLI::App app{"pseudo-spectral estimate laboratory"};
  app.require_subcommand(1);

  ExperimentConfig config;
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file; flags override its keys");
    cmd->add_option("--geometry", config.geometry, "geometry catalog entry");
    cmd->add_option("--n", config.n, "dimension");
    cmd->add_option("--size", config.size, "grid points per axis (power of two)");
    cmd->add_option("--s", config.s, "regularity as a rational, e.g. 1/2");
    cmd->add_option("--q", config.q, "pin one space exponent (rational or 'inf') instead of enumerating");
    cmd->add_option("--pairs", config.pairs, "interior admissible pairs to enumerate");
    cmd->add_option("--family", config.family, "family size for sweeps");
    cmd->add_option("--T", config.T, "time horizon");
    cmd->add_option("--M", config.M, "time steps");
    cmd->add_option("--delta", config.delta, "chart radius");
    cmd->add_option("--charts", config.charts, "number of charts");
    cmd->add_option("--seed", config.seed, "RNG seed (recorded in every output)");
    cmd->add_option("--workers", config.workers, "worker pool size");
    cmd->add_option("--out", config.outdir, "output directory (default $PSLAB_OUT or ./runs)");
  };

  CLI::App* verify = app.add_subcommand("verify", "identity verification suites");
  CLI::App* scan = app.add_subcommand("scan", "inequality ratio sweeps");
  std::string verify_suite, scan_suite;
  verify->add_option("suite", verify_suite, "extension | parity | partition | propagator | commutators")
      ->required();
  scan->add_option("suite", scan_suite,
                   "strichartz | smoothing | strichartz-smoothing | endpoint-pipeline | k-functional")
      ->required();
  add_common(verify);
  add_common(scan);

  CLI11_PARSE(app, argc, argv);

  // file first, then flags override: re-parse by reading file into a fresh
  // config and replaying the command line on top of it
  if (!config_path.empty()) {
    ExperimentConfig from_file;
    try {
      from_file.load_json(config_path);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
    // flags that were actually given already live in `config`; copy the
    // file values for everything left at its default
    ExperimentConfig defaults;
    auto take = [](auto& slot, const auto& cli_value, const auto& default_value, const auto& file_value) {
      slot = cli_value == default_value ? file_value : cli_value;
    };
    take(config.geometry, config.geometry, defaults.geometry, from_file.geometry);
    take(config.n, config.n, defaults.n, from_file.n);
    take(config.size, config.size, defaults.size, from_file.size);
    take(config.s, config.s, defaults.s, from_file.s);
    take(config.q, config.q, defaults.q, from_file.q);
    take(config.pairs, config.pairs, defaults.pairs, from_file.pairs);
    take(config.family, config.family, defaults.family, from_file.family);
    take(config.T, config.T, defaults.T, from_file.T);
    take(config.M, config.M, defaults.M, from_file.M);
    take(config.delta, config.delta, defaults.delta, from_file.delta);
    take(config.charts, config.charts, defaults.charts, from_file.charts);
    take(config.seed, config.seed, defaults.seed, from_file.seed);
    take(config.workers, config.workers, defaults.workers, from_file.workers);
    take(config.outdir, config.outdir, defaults.outdir, from_file.outdir);
  }

  if (verify->parsed()) {
    config.mode = "verify";
    config.suite = verify_suite;
  } else {
    config.mode = "scan";
    config.suite = scan_suite;
  }
  return run(std::move(config));
}

}  // namespace pslab
