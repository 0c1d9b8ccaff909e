#include "zicopula/fitted_model.hpp"

#include "zicopula/dataset_io.hpp"
#include "zicopula/error.hpp"
#include "zicopula/rng.hpp"

#include "json.hpp"

#include <cmath>
#include <sstream>

namespace zicopula {

using nlohmann::json;

namespace {

enum Stream : std::uint64_t
{
  kStreamRbm = 21,
  kStreamZibt = 22,
  kStreamGmm = 23,
  kStreamKde = 24,
};

json number(double x)
{
  if (std::isinf(x))
    return x > 0 ? json("inf") : json("-inf");
  if (std::isnan(x))
    throw NumericError("model file: NaN parameter");
  return json(x);
}

double get_number(const json& j)
{
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "-inf")
      return -std::numeric_limits<double>::infinity();
    if (s == "inf")
      return std::numeric_limits<double>::infinity();
    throw DataError("model file: unexpected string '" + s + "' where a number was expected");
  }
  if (!j.is_number())
    throw DataError("model file: expected a number");
  return j.get<double>();
}

json vec_json(const Vector& v)
{
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i)
    a.push_back(number(v(i)));
  return a;
}

json mat_json(const Matrix& m)
{
  json a = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

Vector json_vec(const json& j)
{
  if (!j.is_array())
    throw DataError("model file: expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Index>(i)) = get_number(j[i]);
  return v;
}

Matrix json_mat(const json& j)
{
  if (!j.is_array() || j.empty())
    throw DataError("model file: expected a nonempty matrix");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != cols)
      throw DataError("model file: ragged matrix");
    m.row(static_cast<Index>(r)) = json_vec(j[r]).transpose();
  }
  return m;
}

json marginals_json(const std::vector<MarginalModel>& ms)
{
  json a = json::array();
  for (const auto& m : ms) {
    json c = json::array();
    for (double x : m.centers())
      c.push_back(number(x));
    a.push_back({ { "q", m.q() }, { "bandwidth", m.bandwidth() }, { "rescale_b", m.rescale_b() }, { "centers", c } });
  }
  return a;
}

std::vector<MarginalModel> json_marginals(const json& a)
{
  std::vector<MarginalModel> out;
  for (const auto& m : a) {
    std::vector<double> c;
    for (const auto& x : m.at("centers"))
      c.push_back(get_number(x));
    out.emplace_back(get_number(m.at("q")), std::move(c), get_number(m.at("bandwidth")),
                     get_number(m.at("rescale_b")));
  }
  return out;
}

CorrelationMatrix json_sigma(const json& j)
{
  return CorrelationMatrix::from_matrix(json_mat(j));
}

void check_dim(std::size_t marginals, Index d)
{
  if (static_cast<Index>(marginals) != d)
    throw DataError("model file: marginal count does not match correlation dimension");
}

std::string fmt(double x)
{
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

} // namespace

Index FittedModel::dim() const
{
  return std::visit([](const auto& m) { return m.dim(); }, model);
}

FittedModel fit_model(const Matrix& data, const FitSpec& spec)
{
  FittedModel out;
  switch (spec.kind) {
    case ModelKind::Zicar: {
      ZicarFitOptions o = spec.zicar;
      o.rbm.seed = derive_seed(spec.seed, kStreamRbm);
      out.model = fit_zicar(data, o, &out.warnings);
      break;
    }
    case ModelKind::Zibt: {
      ZibtFitOptions o = spec.zibt;
      o.seed = derive_seed(spec.seed, kStreamZibt);
      out.model = fit_zibt(data, o);
      break;
    }
    case ModelKind::Gmm: {
      if (spec.gmm_k > 0) {
        GmmFitOptions o;
        o.k = spec.gmm_k;
        o.reg = spec.gmm_reg;
        o.seed = derive_seed(spec.seed, kStreamGmm);
        out.model = fit_gmm(data, o);
      } else {
        out.model = fit_gmm_tuned(data, derive_seed(spec.seed, kStreamGmm), spec.gmm_reg).model;
      }
      break;
    }
    case ModelKind::Kde: {
      if (!data.allFinite() || (data.array() < 0.0).any())
        throw DataError("fit: data must be finite and nonnegative");
      if (spec.kde_multiplier > 0.0)
        out.model = fit_kde_multi(data, spec.kde_multiplier);
      else
        out.model = fit_kde_tuned(data, derive_seed(spec.seed, kStreamKde)).model;
      break;
    }
  }
  return out;
}

double model_loglik(const FittedModel& m, const Vector& x, std::uint64_t row_index)
{
  if (x.size() != m.dim())
    throw DataError("score: row has " + std::to_string(x.size()) + " columns, model expects " +
                    std::to_string(m.dim()));
  if (!x.allFinite() || (x.array() < 0.0).any())
    throw DataError("score: values must be finite and nonnegative");
  switch (m.kind()) {
    case ModelKind::Zicar:
      return zicar_loglik(std::get<ZicarModel>(m.model), x);
    case ModelKind::Zibt:
      return zibt_loglik(std::get<ZibtModel>(m.model), x, row_index);
    case ModelKind::Gmm:
      return gmm_loglik(std::get<GmmModel>(m.model), x);
    case ModelKind::Kde:
      return kde_loglik(std::get<KdeModel>(m.model), x);
  }
  throw std::logic_error("unreachable");
}

std::vector<double> score_nll(const FittedModel& m, const Matrix& data)
{
  if (data.cols() != m.dim())
    throw DataError("score: data has " + std::to_string(data.cols()) + " columns, model expects " +
                    std::to_string(m.dim()));
  std::vector<double> out(static_cast<std::size_t>(data.rows()));
  for (Index r = 0; r < data.rows(); ++r)
    out[static_cast<std::size_t>(r)] = -model_loglik(m, data.row(r).transpose(), static_cast<std::uint64_t>(r));
  return out;
}

std::string serialize_model(const FittedModel& fm)
{
  json j;
  j["schema_version"] = kModelSchemaVersion;
  j["kind"] = model_kind_name(fm.kind());
  std::visit(
    [&](const auto& m) {
      using T = std::decay_t<decltype(m)>;
      if constexpr (std::is_same_v<T, ZicarModel>) {
        j["marginals"] = marginals_json(m.marginals);
        j["sigma"] = mat_json(m.sigma.matrix());
        if (const auto* b = std::get_if<BernoulliMask>(&m.mask)) {
          j["mask"] = { { "type", "bernoulli" }, { "q", vec_json(b->q) } };
        } else {
          const auto& r = std::get<RbmMask>(m.mask);
          j["mask"] = { { "type", "rbm" },
                        { "weights", mat_json(r.weights()) },
                        { "visible_bias", vec_json(r.visible_bias()) },
                        { "hidden_bias", vec_json(r.hidden_bias()) },
                        { "log_z", r.log_z() } };
        }
      } else if constexpr (std::is_same_v<T, ZibtModel>) {
        j["marginals"] = marginals_json(m.marginals);
        j["sigma"] = mat_json(m.copula.sigma.matrix());
        j["a"] = vec_json(m.copula.a);
        j["likelihood_mode"] = m.mode == LikelihoodMode::Exact ? "exact" : "approx";
        j["mc_samples"] = m.mc_samples;
        j["seed"] = m.seed;
      } else if constexpr (std::is_same_v<T, GmmModel>) {
        j["weights"] = vec_json(m.weights());
        j["means"] = mat_json(m.means());
        json covs = json::array();
        for (const auto& c : m.covariances())
          covs.push_back(mat_json(c));
        j["covariances"] = covs;
      } else {
        j["centers"] = mat_json(m.centers());
        j["bandwidths"] = vec_json(m.bandwidths());
      }
    },
    fm.model);
  return j.dump(1) + "\n";
}

FittedModel deserialize_model(const std::string& text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model file: not valid JSON: ") + e.what());
  }
  FittedModel fm;
  try {
    if (j.at("schema_version").get<int>() != kModelSchemaVersion)
      throw DataError("model file: unsupported schema_version");
    const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
    switch (kind) {
      case ModelKind::Zicar: {
        ZicarModel m;
        m.marginals = json_marginals(j.at("marginals"));
        m.sigma = json_sigma(j.at("sigma"));
        check_dim(m.marginals.size(), m.sigma.dim());
        const auto& mask = j.at("mask");
        const auto type = mask.at("type").get<std::string>();
        if (type == "bernoulli") {
          m.mask = BernoulliMask{ json_vec(mask.at("q")) };
        } else if (type == "rbm") {
          RbmMask r(json_mat(mask.at("weights")), json_vec(mask.at("visible_bias")), json_vec(mask.at("hidden_bias")));
          const double stored = get_number(mask.at("log_z"));
          if (std::abs(stored - r.log_z()) > 1e-9 * std::max(1.0, std::abs(stored)))
            throw DataError("model file: stored RBM log_Z does not match its parameters");
          m.mask = std::move(r);
        } else {
          throw DataError("model file: unknown mask type '" + type + "'");
        }
        fm.model = std::move(m);
        break;
      }
      case ModelKind::Zibt: {
        ZibtModel m;
        m.marginals = json_marginals(j.at("marginals"));
        CorrelationMatrix s = json_sigma(j.at("sigma"));
        check_dim(m.marginals.size(), s.dim());
        Vector a(s.dim());
        for (Index i = 0; i < s.dim(); ++i)
          a(i) = m.marginals[static_cast<std::size_t>(i)].a();
        if (j.contains("a")) {
          const Vector stored = json_vec(j.at("a"));
          for (Index i = 0; i < a.size(); ++i)
            if (stored.size() != a.size() || !(stored(i) == a(i) || std::abs(stored(i) - a(i)) <= 1e-9))
              throw DataError("model file: thresholds disagree with the zero rates");
        }
        m.copula = RgdParams(std::move(s), std::move(a));
        const auto mode = j.at("likelihood_mode").get<std::string>();
        if (mode != "exact" && mode != "approx")
          throw DataError("model file: unknown likelihood_mode '" + mode + "'");
        m.mode = mode == "exact" ? LikelihoodMode::Exact : LikelihoodMode::Approx;
        m.mc_samples = j.at("mc_samples").get<std::size_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        fm.model = std::move(m);
        break;
      }
      case ModelKind::Gmm: {
        std::vector<Matrix> covs;
        for (const auto& c : j.at("covariances"))
          covs.push_back(json_mat(c));
        fm.model = GmmModel(json_vec(j.at("weights")), json_mat(j.at("means")), std::move(covs));
        break;
      }
      case ModelKind::Kde:
        fm.model = KdeModel(json_mat(j.at("centers")), json_vec(j.at("bandwidths")));
        break;
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  return fm;
}

std::string model_summary(const FittedModel& fm)
{
  std::ostringstream os;
  os << "kind: " << model_kind_name(fm.kind()) << "\n"
     << "dimension: " << fm.dim() << "\n";
  auto marginal_lines = [&](const std::vector<MarginalModel>& ms) {
    os << "zero rates q:";
    for (const auto& m : ms)
      os << ' ' << fmt(m.q());
    os << "\nrescale factors b:";
    for (const auto& m : ms)
      os << ' ' << fmt(m.rescale_b());
    os << "\nbandwidths:";
    for (const auto& m : ms)
      os << ' ' << fmt(m.bandwidth());
    os << "\n";
  };
  std::visit(
    [&](const auto& m) {
      using T = std::decay_t<decltype(m)>;
      if constexpr (std::is_same_v<T, ZicarModel>) {
        marginal_lines(m.marginals);
        os << "sigma condition number: " << fmt(condition_number(m.sigma.matrix())) << "\n";
        if (const auto* r = std::get_if<RbmMask>(&m.mask))
          os << "mask: rbm (" << r->n_hidden() << " hidden units, log_Z " << fmt(r->log_z()) << ")\n";
        else
          os << "mask: bernoulli\n";
      } else if constexpr (std::is_same_v<T, ZibtModel>) {
        marginal_lines(m.marginals);
        os << "sigma condition number: " << fmt(condition_number(m.copula.sigma.matrix())) << "\n"
           << "likelihood mode: " << (m.mode == LikelihoodMode::Exact ? "exact" : "approx") << "\n";
      } else if constexpr (std::is_same_v<T, GmmModel>) {
        os << "components: " << m.k() << "\n";
      } else {
        os << "bandwidths:";
        for (Index i = 0; i < m.bandwidths().size(); ++i)
          os << ' ' << fmt(m.bandwidths()(i));
        os << "\n";
      }
    },
    fm.model);
  for (const auto& w : fm.warnings)
    os << "warning: " << w << "\n";
  return os.str();
}

const char* model_kind_name(ModelKind k)
{
  switch (k) {
    case ModelKind::Zicar:
      return "zicar";
    case ModelKind::Zibt:
      return "zibt";
    case ModelKind::Gmm:
      return "gmm";
    case ModelKind::Kde:
      return "kde";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& s)
{
  if (s == "zicar")
    return ModelKind::Zicar;
  if (s == "zibt")
    return ModelKind::Zibt;
  if (s == "gmm")
    return ModelKind::Gmm;
  if (s == "kde")
    return ModelKind::Kde;
  throw UsageError("unknown model kind '" + s + "' (expected zicar, zibt, gmm or kde)");
}

} // namespace zicopula
