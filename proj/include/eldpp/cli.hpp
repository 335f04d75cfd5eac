#ifndef ELDPP_CLI_HPP
#define ELDPP_CLI_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eldpp/ensemble.hpp"
#include "eldpp/error.hpp"
#include "eldpp/gibbs.hpp"
#include "eldpp/io.hpp"
#include "eldpp/kernels.hpp"
#include "eldpp/oracle.hpp"
#include "eldpp/random.hpp"
#include "eldpp/random_models.hpp"
#include "eldpp/sampling.hpp"
#include "eldpp/verify.hpp"

namespace eldpp::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kConfig = 2, kModel = 3, kNumerical = 4 };

inline int exit_code(const Error& e) {
  switch (category(e.kind())) {
    case ErrorCategory::Config: return kConfig;
    case ErrorCategory::Model: return kModel;
    case ErrorCategory::Numerical: return kNumerical;
  }
  return kInternal;
}

/// Where the model comes from. Exactly one of: a point cloud (file or
/// generated) with a kernel, an explicit L (and V), or a factor Psi (and V).
struct ModelFlags {
  std::string points;
  std::vector<long> generate;
  long n = 0;
  long d = 2;
  std::string kernel = "distance";
  double beta = 1.0;
  double lengthscale = 1.0;
  std::optional<double> gamma;
  std::optional<double> target_size;
  std::string L_file;
  std::string V_file;
  std::string psi_file;
};

struct ModeFlags {
  std::optional<long> fixed_size;
  bool varying = false;

  SizeMode mode() const {
    return fixed_size ? SizeMode::fixed_size(*fixed_size) : SizeMode::varying();
  }
};

struct OutputFlags {
  std::string out;
  std::string format = "jsonl";
};

inline void add_model_flags(CLI::App* app, ModelFlags& m) {
  auto* pts = app->add_option("--points", m.points, "points CSV (header x1..xd)");
  auto* gen = app->add_option("--generate-gaussian", m.generate, "generate N standard Gaussian points in R^D")
                  ->expected(2);
  app->add_option("--n", m.n, "number of generated Gaussian points");
  app->add_option("--d", m.d, "dimension of generated points")->capture_default_str();
  app->add_option("--kernel", m.kernel, "distance or gaussian")
      ->check(CLI::IsMember({"distance", "gaussian"}))
      ->capture_default_str();
  app->add_option("--beta", m.beta, "distance exponent")->capture_default_str();
  app->add_option("--lengthscale", m.lengthscale, "Gaussian kernel length scale")->capture_default_str();
  auto* g = app->add_option("--gamma", m.gamma, "kernel scale");
  auto* t = app->add_option("--target-size", m.target_size, "calibrate gamma to this expected size");
  g->excludes(t);
  pts->excludes(gen);
  auto* l = app->add_option("--L", m.L_file, "kernel matrix CSV");
  app->add_option("--V", m.V_file, "feature matrix CSV (n x p)");
  auto* psi = app->add_option("--psi", m.psi_file, "factor Psi CSV (n x r), L = Psi Psi^T");
  l->excludes(psi);
}

inline void add_mode_flags(CLI::App* app, ModeFlags& m) {
  auto* f = app->add_option("--fixed-size", m.fixed_size, "sample exactly M items");
  auto* v = app->add_flag("--varying", m.varying, "varying-size law (default)");
  f->excludes(v);
}

inline void add_output_flags(CLI::App* app, OutputFlags& o) {
  app->add_option("--out", o.out, "output file (default stdout)");
  app->add_option("--format", o.format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}))
      ->capture_default_str();
}

struct BuiltModel {
  std::optional<Nnp> nnp;
  std::optional<SpectralMixture> low_rank;  // set when built from Psi
  std::optional<PointCloud> cloud;
  io::Json metadata = io::Json::object();

  const SpectralMixture& mixture() const { return low_rank ? *low_rank : nnp->mixture(); }
  Index n() const { return mixture().n(); }
};

inline bool has_points(const ModelFlags& m) { return !m.points.empty() || !m.generate.empty() || m.n > 0; }

/// Config-level checks that do not touch any file.
inline void validate_model_flags(const ModelFlags& m) {
  const int sources = (has_points(m) ? 1 : 0) + (m.L_file.empty() ? 0 : 1) + (m.psi_file.empty() ? 0 : 1);
  if (sources == 0) fail(ErrorKind::InvalidArgument, "no model: give --points, --generate-gaussian, --n, --L or --psi");
  if (sources > 1 && !(m.L_file.empty() && m.psi_file.empty()))
    fail(ErrorKind::InvalidArgument, "--L/--psi cannot be combined with point input");
  if (!m.V_file.empty() && has_points(m))
    fail(ErrorKind::InvalidArgument, "--V is only used with --L or --psi");
  if (!m.generate.empty() && m.n > 0) fail(ErrorKind::InvalidArgument, "--generate-gaussian and --n both given");
  if (!m.generate.empty() && (m.generate[0] < 1 || m.generate[1] < 1))
    fail(ErrorKind::InvalidArgument, "--generate-gaussian needs positive N and D");
  if (m.n < 0 || m.d < 1) fail(ErrorKind::InvalidArgument, "--n must be positive and --d at least 1");
  if (m.gamma && !(*m.gamma > 0.0)) fail(ErrorKind::InvalidArgument, "--gamma must be positive");
  if (m.target_size && !has_points(m))
    fail(ErrorKind::InvalidArgument, "--target-size needs a point cloud and kernel");
}

inline BuiltModel build_model(const ModelFlags& m, Rng& rng) {
  BuiltModel out;
  if (!m.L_file.empty() || !m.psi_file.empty()) {
    Matrix V = m.V_file.empty() ? Matrix() : io::load_matrix(m.V_file);
    if (!m.L_file.empty()) {
      out.nnp = build_nnp(io::load_matrix(m.L_file), std::move(V));
      out.metadata["model"] = "matrix";
    } else {
      out.low_rank = low_rank_mixture(io::load_matrix(m.psi_file), V);
      out.metadata["model"] = "factor";
    }
    return out;
  }
  Matrix pts;
  if (!m.points.empty()) {
    pts = io::load_points(m.points);
    out.metadata["points"] = m.points;
  } else {
    const Index n = m.generate.empty() ? m.n : m.generate[0];
    const Index d = m.generate.empty() ? m.d : m.generate[1];
    Rng cloud_rng = rng.split(0);
    pts = random_models::gaussian_matrix(n, d, cloud_rng);
    out.metadata["points"] = "standard Gaussian n=" + std::to_string(n) + " d=" + std::to_string(d);
  }
  out.cloud = PointCloud::make(std::move(pts));
  out.metadata["kernel"] = m.kernel;
  if (m.kernel == "distance") {
    auto spec = CpdKernelSpec::make(m.beta);
    double gamma = m.gamma.value_or(1.0);
    if (m.target_size) gamma = calibrate_gamma(*out.cloud, spec, *m.target_size).gamma;
    out.nnp = distance_power_nnp(*out.cloud, spec.with_gamma(gamma));
    out.metadata["beta"] = m.beta;
    out.metadata["gamma"] = gamma;
  } else {
    double gamma = m.gamma.value_or(1.0);
    if (m.target_size) {
      const Nnp unit = gaussian_lensemble(*out.cloud, m.lengthscale, 1.0);
      gamma = calibrate_gamma(unit.mixture(), *m.target_size).gamma;
    }
    out.nnp = gaussian_lensemble(*out.cloud, m.lengthscale, gamma);
    out.metadata["lengthscale"] = m.lengthscale;
    out.metadata["gamma"] = gamma;
  }
  return out;
}

inline void describe(BuiltModel& model) {
  const auto& mix = model.mixture();
  model.metadata["n"] = mix.n();
  model.metadata["p"] = mix.p();
  model.metadata["q"] = mix.q();
  model.metadata["expected_size"] = expected_size(mix);
}

/// Opens --out, or returns the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) fail(ErrorKind::InvalidArgument, "cannot open '" + path + "' for writing");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

struct SampleFlags {
  ModelFlags model;
  ModeFlags mode;
  OutputFlags output;
  long draws = 100;
  std::uint64_t seed = 1;
  std::string sampler = "exact";
  long burn_in = 100;
  long thin = 1;
};

inline int cmd_sample(const SampleFlags& f, Streams io_) {
  validate_model_flags(f.model);
  if (f.draws < 0) fail(ErrorKind::InvalidArgument, "--draws must be non-negative");
  if (f.burn_in < 0 || f.thin < 1) fail(ErrorKind::InvalidArgument, "--burn-in >= 0 and --thin >= 1 required");
  if (f.sampler == "lowrank" && f.model.psi_file.empty())
    fail(ErrorKind::InvalidArgument, "--sampler lowrank needs the factor via --psi");
  if (f.sampler == "gibbs" && !f.model.psi_file.empty())
    fail(ErrorKind::InvalidArgument, "--sampler gibbs needs an explicit model (--L or points)");
  const auto format = io::parse_format(f.output.format);

  Rng rng(f.seed);
  BuiltModel model = build_model(f.model, rng);
  describe(model);
  const SizeMode mode = f.mode.mode();
  if (mode.is_fixed()) {
    const Index m = *mode.fixed, p = model.mixture().p(), q = model.mixture().q();
    if (m < p || m > p + q)
      fail(ErrorKind::SizeOutOfRange, "--fixed-size " + std::to_string(m) + " outside [p, p + q] = [" +
                                          std::to_string(p) + ", " + std::to_string(p + q) + "]");
  }

  io::SampleFile file;
  file.metadata["seed"] = f.seed;
  file.metadata["rng"] = std::string(Rng::kAlgorithm);
  file.metadata["sampler"] = f.sampler;
  file.metadata["mode"] = mode.is_fixed() ? io::Json(*mode.fixed) : io::Json("varying");
  file.metadata["draws"] = f.draws;
  file.metadata["indexing"] = "0-based";
  for (const auto& [k, v] : model.metadata.items()) file.metadata[k] = v;

  Rng draw_rng = rng.split(1);
  if (f.sampler == "gibbs") {
    GibbsConfig cfg;
    cfg.fixed_size = mode.fixed;
    cfg.burn_in = f.burn_in;
    cfg.thin = f.thin;
    cfg.iterations = std::max<long>(f.draws, 1);
    file.metadata["burn_in"] = f.burn_in;
    file.metadata["thin"] = f.thin;
    GibbsDiagnostics diag;
    file.samples = gibbs_chain(*model.nnp, cfg, draw_rng, &diag);
    file.samples.resize(static_cast<std::size_t>(f.draws));
    file.metadata["acceptance_rate"] =
        diag.proposed ? static_cast<double>(diag.accepted) / static_cast<double>(diag.proposed) : 0.0;
  } else {
    const auto& mix = model.mixture();
    file.samples.reserve(static_cast<std::size_t>(f.draws));
    for (long k = 0; k < f.draws; ++k) file.samples.push_back(sample_mixture(mix, draw_rng, mode));
  }

  Sink sink(f.output.out, io_.out);
  io::write_samples(sink.get(), file, format);
  return kOk;
}

struct RepulsionFlags {
  ModelFlags model;
  std::optional<long> anchor;
  std::uint64_t seed = 1;
  std::string out;
};

inline int cmd_repulsion(const RepulsionFlags& f, Streams io_) {
  validate_model_flags(f.model);
  Rng rng(f.seed);
  BuiltModel model = build_model(f.model, rng);
  const auto K = marginal_kernel(model.mixture());
  Index anchor;
  if (f.anchor) {
    anchor = *f.anchor;
    if (anchor < 0 || anchor >= K.n())
      fail(ErrorKind::IndexOutOfRange, "--anchor " + std::to_string(anchor) + " outside [0, n)");
  } else {
    anchor = model.cloud ? model.cloud->nearest_to_centroid() : 0;
  }
  Sink sink(f.out, io_.out);
  auto& os = sink.get();
  os << "# anchor=" << anchor << "\n# seed=" << f.seed << "\n# rng=" << Rng::kAlgorithm << '\n';
  os << "j,distance,rho\n";
  for (Index j = 0; j < K.n(); ++j) {
    const double dist = model.cloud ? model.cloud->distance(anchor, j) : std::numeric_limits<double>::quiet_NaN();
    os << j << ',' << io::format_double(dist) << ',' << io::format_double(repulsion_index(K, anchor, j)) << '\n';
  }
  return kOk;
}

struct VerifyFlags {
  std::uint64_t seed = verify::VerifyOptions{}.seed;
  std::vector<int> only;
  std::string L_file;
  std::string V_file;
};

/// Checks on a user model: enumeration identities that need n <= 12.
inline std::vector<verify::CheckReport> verify_model(const Nnp& nnp) {
  std::vector<verify::CheckReport> out;
  auto add = [&](int id, std::string name, double value, double threshold, std::string note) {
    verify::CheckReport r;
    r.id = id;
    r.name = std::move(name);
    r.value = value;
    r.threshold = threshold;
    r.pass = value < threshold;
    r.note = std::move(note);
    out.push_back(std::move(r));
  };
  add(0, "model validation", 0.0, 1.0,
      "n = " + std::to_string(nnp.n()) + ", p = " + std::to_string(nnp.p()) + ", q = " + std::to_string(nnp.q()));
  if (nnp.n() > 12) return out;
  double norm_err = oracle::enumerate_pmf(nnp).normalization_error;
  for (Index m = nnp.p(); m <= nnp.p() + nnp.q(); ++m)
    norm_err = std::max(norm_err, oracle::enumerate_pmf(nnp, SizeMode::fixed_size(m)).normalization_error);
  add(3, "normalization constants", norm_err, 1e-9, "all size modes");
  if (nnp.n() <= 10) {
    add(2, "generalized Cauchy-Binet", oracle::check_cauchy_binet(nnp).max_relative_error, 1e-8, "every subset");
    add(4, "marginal kernel", oracle::inclusion_check(nnp, 3), 1e-8, "|A| <= 3");
    const auto flipped = oracle::complement_of(oracle::enumerate_pmf(nnp));
    const Matrix IK = Matrix::Identity(nnp.n(), nnp.n()) - marginal_kernel(nnp).K();
    add(6, "complement process", oracle::tv_distance(flipped, oracle::enumerate_from_kernel(IK)), 1e-8, "TV");
  }
  return out;
}

inline int cmd_verify(const VerifyFlags& f, Streams io_) {
  std::vector<verify::CheckReport> reports;
  if (!f.L_file.empty()) {
    Matrix V = f.V_file.empty() ? Matrix() : io::load_matrix(f.V_file);
    const Nnp nnp = build_nnp(io::load_matrix(f.L_file), std::move(V));
    reports = verify_model(nnp);
    for (const auto& r : reports) io_.out << verify::format_line(r) << '\n';
  } else {
    verify::VerifyOptions opts;
    opts.seed = f.seed;
    opts.only = f.only;
    opts.on_result = [&](const verify::CheckReport& r) { io_.out << verify::format_line(r) << std::endl; };
    reports = verify::run_all(opts);
  }
  const auto failed = std::count_if(reports.begin(), reports.end(), [](const auto& r) { return !r.pass; });
  io_.out << (failed == 0 ? "all checks passed" : std::to_string(failed) + " checks failed") << '\n';
  return failed == 0 ? kOk : kNumerical;
}

struct SizeDistFlags {
  ModelFlags model;
  std::uint64_t seed = 1;
  std::string out;
  std::string samples;
  std::string samples_format = "jsonl";
};

inline int cmd_size_dist(const SizeDistFlags& f, Streams io_) {
  validate_model_flags(f.model);
  const auto format = io::parse_format(f.samples_format);
  Rng rng(f.seed);
  BuiltModel model = build_model(f.model, rng);
  const Vector law = size_distribution(model.mixture());
  std::optional<oracle::ChiSquareResult> chi;
  if (!f.samples.empty()) {
    const auto file = io::load_samples(f.samples, format);
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(law.size()), 0);
    for (const auto& s : file.samples) {
      s.check_bound(model.n());
      ++counts[s.size()];
    }
    chi = oracle::chi_square_size(counts, law);
  }
  Sink sink(f.out, io_.out);
  auto& os = sink.get();
  os << "m,probability\n";
  for (Index m = 0; m < law.size(); ++m) os << m << ',' << io::format_double(law(m)) << '\n';
  if (chi) {
    io_.err << "chi-square " << chi->statistic << " on " << chi->dof << " dof, critical " << chi->critical
            << " at 0.999: " << (chi->pass ? "consistent" : "REJECTED") << '\n';
    return chi->pass ? kOk : kNumerical;
  }
  return kOk;
}

struct ForestFlags {
  std::string graph;
  double q = 1.0;
  long draws = 100;
  std::uint64_t seed = 1;
  OutputFlags output;
};

inline int cmd_forest(const ForestFlags& f, Streams io_) {
  if (!(f.q > 0.0)) fail(ErrorKind::InvalidArgument, "--q must be positive");
  if (f.draws < 0) fail(ErrorKind::InvalidArgument, "--draws must be non-negative");
  const auto format = io::parse_format(f.output.format);
  const auto graph = io::load_edge_list(f.graph);
  const auto lap = GraphLaplacian::from_edges(graph.n, graph.edges);
  const Nnp nnp = forest_roots_nnp(lap, f.q);
  double expected = 0.0;
  for (Index i = 0; i < lap.n(); ++i) expected += f.q / (f.q + lap.eigenvalues()(i));

  io::SampleFile file;
  file.metadata["seed"] = f.seed;
  file.metadata["rng"] = std::string(Rng::kAlgorithm);
  file.metadata["graph"] = f.graph;
  file.metadata["n"] = lap.n();
  file.metadata["q"] = f.q;
  file.metadata["expected_roots"] = expected;
  file.metadata["indexing"] = "0-based";
  Rng rng = Rng(f.seed).split(1);
  for (long k = 0; k < f.draws; ++k) file.samples.push_back(sample_ele(nnp, rng));
  Sink sink(f.output.out, io_.out);
  io::write_samples(sink.get(), file, format);
  io_.err << "expected root count " << io::format_double(expected) << '\n';
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Sampling and diagnostics for extended L-ensembles (0-based indices)", "eldpp"};
  app.require_subcommand(1);
  Streams streams{out, err};

  SampleFlags sample;
  auto* s = app.add_subcommand("sample", "draw subsets from a model");
  add_model_flags(s, sample.model);
  add_mode_flags(s, sample.mode);
  add_output_flags(s, sample.output);
  s->add_option("--draws", sample.draws)->capture_default_str();
  s->add_option("--seed", sample.seed)->capture_default_str();
  s->add_option("--sampler", sample.sampler)
      ->check(CLI::IsMember({"exact", "lowrank", "gibbs"}))
      ->capture_default_str();
  s->add_option("--burn-in", sample.burn_in, "Gibbs sweeps discarded")->capture_default_str();
  s->add_option("--thin", sample.thin, "Gibbs sweeps per record")->capture_default_str();

  RepulsionFlags rep;
  auto* r = app.add_subcommand("repulsion", "repulsion index against an anchor item, CSV");
  add_model_flags(r, rep.model);
  r->add_option("--anchor", rep.anchor, "anchor index (default: nearest the centroid)");
  r->add_option("--seed", rep.seed)->capture_default_str();
  r->add_option("--out", rep.out, "output file (default stdout)");

  VerifyFlags ver;
  auto* v = app.add_subcommand("verify", "run the property checks");
  v->add_option("--seed", ver.seed)->capture_default_str();
  v->add_option("--only", ver.only, "criteria to run")->delimiter(',');
  v->add_option("--L", ver.L_file, "check this kernel instead of random models");
  v->add_option("--V", ver.V_file, "feature matrix for --L");

  SizeDistFlags sd;
  auto* z = app.add_subcommand("size-dist", "P(|X| = m) as CSV");
  add_model_flags(z, sd.model);
  z->add_option("--seed", sd.seed)->capture_default_str();
  z->add_option("--out", sd.out, "output file (default stdout)");
  z->add_option("--samples", sd.samples, "sample file to test against the law");
  z->add_option("--samples-format", sd.samples_format)->check(CLI::IsMember({"csv", "jsonl"}));

  ForestFlags fo;
  auto* f = app.add_subcommand("forest", "sample root sets of random spanning forests");
  f->add_option("--graph", fo.graph, "edge list, 0-based vertices")->required();
  f->add_option("--q", fo.q)->capture_default_str();
  f->add_option("--draws", fo.draws)->capture_default_str();
  f->add_option("--seed", fo.seed)->capture_default_str();
  add_output_flags(f, fo.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    if (s->parsed()) return cmd_sample(sample, streams);
    if (r->parsed()) return cmd_repulsion(rep, streams);
    if (v->parsed()) return cmd_verify(ver, streams);
    if (z->parsed()) return cmd_size_dist(sd, streams);
    if (f->parsed()) return cmd_forest(fo, streams);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kConfig;
}

}  // namespace eldpp::cli

#endif  // ELDPP_CLI_HPP
