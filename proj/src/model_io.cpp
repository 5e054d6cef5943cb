#include "fnarx/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fnarx/error.hpp"
#include "fnarx/json_reader.hpp"

namespace fnarx {

using nlohmann::json;

namespace {

json to_json(const ChannelSpec& s) {
  json j;
  j["transform"] = s.kind == TransformKind::kPca ? "pca" : "identity";
  j["nu"] = s.truncation.nu;
  j["components"] = s.truncation.components;
  j["lags"] = s.lags;
  j["memory_s"] = s.memory_s;
  return j;
}

TransformKind parse_kind(const std::string& s, const JsonReader& r) {
  if (s == "pca") return TransformKind::kPca;
  if (s == "identity") return TransformKind::kIdentity;
  r.fail("transform must be \"pca\" or \"identity\", got \"" + s + "\"");
}

ChannelSpec channel_from_json(const json& j, bool strict, const std::string& where,
                              const ChannelSpec& fallback) {
  JsonReader r(j, where, strict);
  ChannelSpec s = fallback;
  if (auto k = r.opt<std::string>("transform")) s.kind = parse_kind(*k, r);
  s.truncation.nu = r.get("nu", s.truncation.nu);
  s.truncation.components = r.get("components", s.truncation.components);
  s.lags = r.get("lags", s.lags);
  s.memory_s = r.get("memory_s", s.memory_s);
  r.finish();
  return s;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const ModelConfig& c) {
  json j;
  j["memory_s"] = c.memory_s;
  j["exogenous"] = to_json(c.exogenous);
  j["output"] = to_json(c.output);
  j["channels"] = json::array();
  for (const auto& s : c.channels) j["channels"].push_back(to_json(s));
  j["basis"] = {{"degree", c.basis.degree},
                {"interaction", c.basis.interaction},
                {"q", c.basis.q}};
  j["max_iters"] = c.max_iters;
  j["k_eval"] = c.k_eval;
  j["max_rows"] = c.max_rows;
  j["gamma"] = c.gamma ? json(*c.gamma) : json(nullptr);
  j["seed"] = c.seed;
  j["init"] = c.init == ForecastInit::kZeros ? "zeros" : "truth";
  j["divergence_factor"] = c.divergence_factor;
  return j;
}

ModelConfig model_config_from_json(const json& j, bool strict, const std::string& where) {
  JsonReader r(j, where, strict);
  ModelConfig c;
  c.memory_s = r.get("memory_s", c.memory_s);
  if (r.has("exogenous")) {
    c.exogenous = channel_from_json(r.raw("exogenous"), strict, r.path("exogenous"), c.exogenous);
  }
  if (r.has("output")) {
    c.output = channel_from_json(r.raw("output"), strict, r.path("output"), c.output);
  }
  if (r.has("channels")) {
    const auto& arr = r.raw("channels");
    if (!arr.is_array()) r.fail("'channels' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      c.channels.push_back(channel_from_json(
          arr[i], strict, r.path("channels[" + std::to_string(i) + "]"), ChannelSpec{}));
    }
  }
  {
    auto b = r.child("basis");
    c.basis.degree = b.get("degree", c.basis.degree);
    c.basis.interaction = b.get("interaction", c.basis.interaction);
    c.basis.q = b.get("q", c.basis.q);
    b.finish();
  }
  c.max_iters = r.get("max_iters", c.max_iters);
  c.k_eval = r.get("k_eval", c.k_eval);
  c.max_rows = r.get("max_rows", c.max_rows);
  c.gamma = r.opt<double>("gamma");
  c.seed = r.get("seed", c.seed);
  if (auto init = r.opt<std::string>("init")) {
    if (*init == "zeros") {
      c.init = ForecastInit::kZeros;
    } else if (*init == "truth") {
      c.init = ForecastInit::kTruth;
    } else {
      r.fail("init must be \"zeros\" or \"truth\", got \"" + *init + "\"");
    }
  }
  c.divergence_factor = r.get("divergence_factor", c.divergence_factor);
  r.finish();
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kInvalidArgument,
                (where.empty() ? std::string() : where + ": ") + e.what());
  }
  return c;
}

json to_json(const SearchGrid& g) {
  return {{"degrees", g.degrees},
          {"interactions", g.interactions},
          {"qs", g.qs},
          {"nus", g.nus},
          {"memories", g.memories}};
}

SearchGrid search_grid_from_json(const json& j, bool strict, const std::string& where) {
  JsonReader r(j, where, strict);
  SearchGrid g;
  g.degrees = r.get("degrees", g.degrees);
  g.interactions = r.get("interactions", g.interactions);
  g.qs = r.get("qs", g.qs);
  g.nus = r.get("nus", g.nus);
  g.memories = r.get("memories", g.memories);
  r.finish();
  return g;
}

json to_json(const FittedModel& m) {
  json j;
  j["schema"] = FittedModel::kSchema;
  j["config"] = to_json(m.config);
  j["dt"] = m.dt;
  j["exogenous"] = m.exogenous_names;
  j["output"] = m.output_name;
  j["memory"] = {{"exogenous_steps", m.memory.exogenous_steps},
                 {"output_steps", m.memory.output_steps}};

  auto& transforms = j["transforms"] = json::array();
  for (const auto& t : m.transforms) {
    json tj;
    if (t.kind == TransformKind::kPca) {
      const auto& p = t.pca;
      tj["kind"] = "pca";
      tj["channel"] = p.channel;
      tj["means"] = p.means;
      tj["stds"] = p.stds;
      std::vector<int> zv(p.zero_variance.begin(), p.zero_variance.end());
      tj["zero_variance"] = zv;
      tj["eigenvalues"] = p.eigenvalues;
      tj["retained"] = p.retained();
      tj["components"] = std::vector<double>(p.components.data(),
                                             p.components.data() + p.components.size());
      tj["explained_variance"] = p.explained_variance;
    } else {
      tj["kind"] = "identity";
      tj["channel"] = t.identity.channel;
      tj["input_width"] = t.identity.input_width;
      tj["columns"] = t.identity.columns;
    }
    transforms.push_back(std::move(tj));
  }

  json terms = json::array();
  for (const auto& t : m.basis.terms()) {
    json term = json::array();
    for (std::size_t k = 0; k < t.vars.size(); ++k) term.push_back({t.vars[k], t.exps[k]});
    terms.push_back(std::move(term));
  }
  j["basis"] = {{"dimension", m.basis.dimension()},
                {"degree", m.basis.degree()},
                {"interaction", m.basis.interaction()},
                {"q", m.basis.q()},
                {"terms", std::move(terms)}};

  std::vector<double> values;
  for (auto a : m.coefficients.active) {
    values.push_back(m.coefficients.values(static_cast<Eigen::Index>(a)));
  }
  j["coefficients"] = {{"size", m.coefficients.values.size()},
                       {"active", m.coefficients.active},
                       {"values", values},
                       {"rank_deficient", m.coefficients.rank_deficient}};

  json evals = json::array();
  for (const auto& e : m.evaluations) {
    evals.push_back({{"iteration", e.iteration},
                     {"mean_nmse", finite_or_null(e.mean_nmse)},
                     {"n_terms", e.n_terms}});
  }
  j["selection"] = {{"chosen_iteration", m.chosen_iteration},
                    {"path_length", m.path_length},
                    {"evaluations", std::move(evals)},
                    {"gamma", m.gamma},
                    {"training_trajectories", m.training_trajectories},
                    {"training_rows", m.training_rows},
                    {"exact_fit", m.exact_fit},
                    {"degenerate_path", m.degenerate_path}};
  return j;
}

FittedModel model_from_json(const json& j) {
  JsonReader r(j, "model", false);
  const auto schema = r.require<std::string>("schema");
  if (schema != FittedModel::kSchema) {
    r.fail("unsupported schema \"" + schema + "\", expected \"" + FittedModel::kSchema + "\"");
  }
  FittedModel m;
  m.config = model_config_from_json(r.raw("config"), false, "model.config");
  m.dt = r.require<double>("dt");
  m.exogenous_names = r.require<std::vector<std::string>>("exogenous");
  m.output_name = r.require<std::string>("output");
  {
    auto mem = r.child("memory");
    m.memory.exogenous_steps = mem.require<std::vector<std::size_t>>("exogenous_steps");
    m.memory.output_steps = mem.require<std::size_t>("output_steps");
  }

  const auto& transforms = r.raw("transforms");
  if (!transforms.is_array()) r.fail("'transforms' must be an array");
  for (std::size_t i = 0; i < transforms.size(); ++i) {
    JsonReader tr(transforms[i], "model.transforms[" + std::to_string(i) + "]", false);
    ChannelTransform t;
    const auto kind = tr.require<std::string>("kind");
    if (kind == "pca") {
      t.kind = TransformKind::kPca;
      auto& p = t.pca;
      p.channel = tr.require<std::string>("channel");
      p.means = tr.require<std::vector<double>>("means");
      p.stds = tr.require<std::vector<double>>("stds");
      const auto zv = tr.get("zero_variance", std::vector<int>(p.means.size(), 0));
      p.zero_variance.assign(zv.begin(), zv.end());
      p.eigenvalues = tr.require<std::vector<double>>("eigenvalues");
      const auto k = tr.require<std::size_t>("retained");
      const auto comps = tr.require<std::vector<double>>("components");
      const auto n = p.means.size();
      if (p.stds.size() != n || p.zero_variance.size() != n || comps.size() != n * k || k < 1) {
        tr.fail("inconsistent PCA dimensions");
      }
      p.components = Eigen::Map<const RowMatrix>(comps.data(), static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(k));
      p.explained_variance = tr.require<double>("explained_variance");
    } else if (kind == "identity") {
      t.kind = TransformKind::kIdentity;
      t.identity = make_identity(tr.require<std::size_t>("input_width"),
                                 tr.require<std::vector<std::size_t>>("columns"),
                                 tr.require<std::string>("channel"));
    } else {
      tr.fail("unknown transform kind \"" + kind + "\"");
    }
    m.transforms.push_back(std::move(t));
  }

  {
    auto b = r.child("basis");
    const auto dim = b.require<std::size_t>("dimension");
    const auto& terms = b.raw("terms");
    if (!terms.is_array()) b.fail("'terms' must be an array");
    std::vector<std::vector<std::uint32_t>> dense;
    for (const auto& term : terms) {
      std::vector<std::uint32_t> alpha(dim, 0);
      for (const auto& pair : term) {
        const auto var = pair.at(0).get<std::size_t>();
        if (var >= dim) b.fail("term variable out of range");
        alpha[var] = pair.at(1).get<std::uint32_t>();
      }
      dense.push_back(std::move(alpha));
    }
    m.basis = MultiIndexSet(dim, b.require<std::size_t>("degree"),
                            b.require<std::size_t>("interaction"), b.require<double>("q"),
                            std::move(dense));
  }

  {
    auto c = r.child("coefficients");
    const auto size = c.require<std::size_t>("size");
    m.coefficients.active = c.require<std::vector<std::size_t>>("active");
    const auto values = c.require<std::vector<double>>("values");
    if (values.size() != m.coefficients.active.size()) c.fail("active/values length mismatch");
    m.coefficients.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (m.coefficients.active[k] >= size) c.fail("active index out of range");
      m.coefficients.values(static_cast<Eigen::Index>(m.coefficients.active[k])) = values[k];
    }
    m.coefficients.rank_deficient = c.get("rank_deficient", false);
  }

  {
    auto s = r.child("selection");
    m.chosen_iteration = s.get<std::size_t>("chosen_iteration", 0);
    m.path_length = s.get<std::size_t>("path_length", 0);
    m.gamma = s.get("gamma", 0.0);
    m.training_trajectories = s.get<std::size_t>("training_trajectories", 0);
    m.training_rows = s.get<std::size_t>("training_rows", 0);
    m.exact_fit = s.get("exact_fit", false);
    m.degenerate_path = s.get("degenerate_path", false);
    const auto& evals = s.raw("evaluations");
    if (evals.is_array()) {
      for (const auto& e : evals) {
        PathEvaluation pe;
        pe.iteration = e.value("iteration", std::size_t{0});
        const auto& v = e.contains("mean_nmse") ? e["mean_nmse"] : json(nullptr);
        pe.mean_nmse = v.is_number() ? v.get<double>() : std::numeric_limits<double>::infinity();
        pe.n_terms = e.value("n_terms", std::size_t{0});
        m.evaluations.push_back(pe);
      }
    }
  }
  m.validate();
  return m;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

void save_model(const FittedModel& model, const std::filesystem::path& path) {
  write_json_file(to_json(model), path);
}

FittedModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_json_file(path));
}

}  // namespace fnarx
