#include "hsel/result_json.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace hsel {

namespace {

using nlohmann::json;

json num_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return nullptr;
  return v;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(num_or_null(v[i]));
  return a;
}

}  // namespace

std::string fit_document_json(const FitResult& result, const Dataset& data,
                              const FitOptions& options, const std::string& method) {
  const int p = data.p(), q = data.q();
  json doc;
  doc["schema_version"] = 1;
  doc["family"] = options.family == Family::normal ? "normal" : "t";
  doc["method"] = method;
  doc["n"] = data.n();
  doc["n_selected"] = data.n_selected();
  doc["p"] = p;
  doc["q"] = q;

  const SlParams& pr = result.params;
  json est;
  est["beta"] = vec_to_json(pr.beta);
  est["gamma"] = vec_to_json(pr.gamma);
  est["sigma2"] = pr.sigma2;
  est["sigma"] = pr.sigma();
  est["rho"] = pr.rho;
  est["nu"] = pr.normal() ? json(nullptr) : json(pr.nu);
  doc["estimates"] = est;

  json se;
  se["beta"] = vec_to_json(result.se.head(p));
  se["gamma"] = vec_to_json(result.se.segment(p, q));
  se["sigma"] = num_or_null(result.se[p + q]);
  se["sigma2"] = num_or_null(result.se_sigma2());
  se["rho"] = num_or_null(result.se[p + q + 1]);
  se["nu"] = nullptr;  // intentionally not produced
  doc["se"] = se;
  doc["se_reliable"] = result.se_reliable;
  doc["se_condition_number"] = num_or_null(result.se_condition);

  doc["loglik"] = result.loglik();
  doc["loglik_trace"] = result.loglik_trace;
  doc["iterations"] = result.iterations;
  doc["converged"] = result.converged;
  doc["nu_at_bound"] = result.nu_at_bound;
  doc["aic"] = result.aic;
  doc["bic"] = result.bic;
  doc["k_params"] = result.k_params;
  doc["warnings"] = result.warnings;
  return doc.dump(2);
}

void write_fit_document(const std::string& path, const FitResult& result, const Dataset& data,
                        const FitOptions& options, const std::string& method) {
  std::ofstream out(path);
  if (!out) throw domain_error("cannot write '" + path + "'");
  out << fit_document_json(result, data, options, method) << "\n";
}

SlParams params_from_json_text(const std::string& text) {
  json doc = json::parse(text);
  const json& est = doc.contains("estimates") ? doc["estimates"] : doc;
  SlParams p;
  auto get_vec = [&](const char* key) {
    const json& a = est.at(key);
    Eigen::VectorXd v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
    return v;
  };
  p.beta = get_vec("beta");
  p.gamma = get_vec("gamma");
  p.sigma2 = est.at("sigma2").get<double>();
  p.rho = est.at("rho").get<double>();
  if (est.contains("nu") && !est["nu"].is_null())
    p.nu = est["nu"].get<double>();
  else
    p.nu = std::numeric_limits<double>::infinity();
  p.validate();
  return p;
}

SlParams params_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return params_from_json_text(text);
}

}  // namespace hsel
