#include "gridseg/json_io.hpp"

#include <ostream>

#include <fmt/format.h>

namespace gridseg::io {

using nlohmann::ordered_json;

namespace {

ordered_json cp_json(ChangePoint c) { return ordered_json::array({c.w, c.h}); }

ordered_json vector_json(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

ordered_json estimate_json(const QuadrantEstimate& est) {
  ordered_json means = ordered_json::array();
  ordered_json supports = ordered_json::array();
  for (int j = 0; j < kQuadrants; ++j) {
    means.push_back(vector_json(est.theta[j]));
    ordered_json s = ordered_json::array();
    for (int k : est.supports[j]) s.push_back(k + 1);
    supports.push_back(std::move(s));
  }
  return {{"means", std::move(means)}, {"supports", std::move(supports)}};
}

ordered_json interval_json(const Interval& iv) { return {{"lo", iv.lo}, {"hi", iv.hi}, {"margin", iv.margin}}; }

}  // namespace

ordered_json trace_json(const EstimationTrace& trace, GridDims dims, const std::string& algorithm) {
  ordered_json j;
  j["schema"] = kSchema;
  j["algorithm"] = algorithm;
  j["dims"] = ordered_json::array({dims.tw, dims.th});
  j["init"] = cp_json(trace.init);
  ordered_json s1 = estimate_json(trace.step1_means);
  s1["lambda"] = trace.lambda_used[0];
  s1["cp"] = cp_json(trace.step1_cp);
  if (trace.step1_boundary_cp) s1["boundary_cp"] = cp_json(*trace.step1_boundary_cp);
  if (trace.gamma_used) s1["gamma"] = ordered_json::array({(*trace.gamma_used)[0], (*trace.gamma_used)[1]});
  if (trace.boundary_gap) s1["boundary_gap"] = ordered_json::array({(*trace.boundary_gap)[0], (*trace.boundary_gap)[1]});
  j["step1"] = std::move(s1);
  ordered_json s2 = estimate_json(trace.step2_means);
  s2["lambda"] = trace.lambda_used[1];
  j["step2"] = std::move(s2);
  j["final_cp"] = cp_json(trace.final_cp);
  return j;
}

ordered_json inference_json(const InferenceReport& r, GridDims dims) {
  const auto& ci = r.intervals;
  ordered_json j;
  j["schema"] = kSchema;
  j["dims"] = ordered_json::array({dims.tw, dims.th});
  j["tau"] = cp_json(r.tau);
  j["alpha"] = ci.alpha;
  j["n_draws"] = r.mc.n_draws;
  j["seed"] = r.mc.seed;
  j["refit"] = estimate_json(r.refit);
  j["xi"] = ordered_json::array({r.profile.xi[0], r.profile.xi[1], r.profile.xi[2], r.profile.xi[3]});
  j["omega"] = {{"w", r.profile.omega_w}, {"h", r.profile.omega_h}};
  j["xi2"] = {{"w", r.profile.xi_w2}, {"h", r.profile.xi_h2}};
  j["xi_inf"] = {{"w", ci.xi_w_inf}, {"h", ci.xi_h_inf}};
  j["psi"] = r.profile.psi;
  j["sigma2"] = {{"w", r.variances.sigma2_w}, {"h", r.variances.sigma2_h}};
  j["q_vanishing"] = ci.q_vanishing;
  j["vanishing"] = {{"w", interval_json(ci.vanishing_w)}, {"h", interval_json(ci.vanishing_h)}};
  j["nonvanishing"] = {{"w", interval_json(ci.nonvanishing_w)}, {"h", interval_json(ci.nonvanishing_h)}};
  return j;
}

ordered_json tree_json(const SegTree& tree) {
  const auto rep = tree_report(tree);
  ordered_json j;
  j["schema"] = kSchema;
  j["dims"] = ordered_json::array({tree.dims.tw, tree.dims.th});
  j["hierarchy_level"] = rep.hierarchy_level ? ordered_json(*rep.hierarchy_level) : ordered_json(nullptr);
  j["depth"] = rep.depth;
  j["cp_count"] = rep.cp_count;
  j["leaf_count"] = rep.leaf_count;
  ordered_json nodes = ordered_json::array();
  for (const auto& [idx, node] : tree.nodes) {
    const Rect& d = node.domain;
    nodes.push_back({{"index", idx.str()},
                     {"level", idx.level()},
                     {"domain", ordered_json::array({d.w_lo, d.w_hi, d.h_lo, d.h_hi})},
                     {"cp", cp_json(node.global_cp())},
                     {"has_change", node.has_change()},
                     {"is_leaf", node.is_leaf()},
                     {"estimated", node.estimated}});
  }
  j["nodes"] = std::move(nodes);
  return j;
}

ordered_json replication_json(const ReplicationRecord& rec, const SimDesign& design) {
  ordered_json j;
  j["schema"] = kSchema;
  j["rep"] = rec.rep;
  j["tau0"] = cp_json(design.tau0());
  j["init"] = cp_json(rec.init);
  j["estimate"] = cp_json(rec.estimate);
  if (!rec.refused.empty()) {
    j["refused"] = rec.refused;
    return j;
  }
  j["sigma2"] = {{"w", rec.sigma2[0]}, {"h", rec.sigma2[1]}};
  j["vanishing"] = {{"w", interval_json(rec.intervals.vanishing_w)}, {"h", interval_json(rec.intervals.vanishing_h)}};
  j["nonvanishing"] = {{"w", interval_json(rec.intervals.nonvanishing_w)},
                       {"h", interval_json(rec.intervals.nonvanishing_h)}};
  j["covered"] = {{"vanishing_w", rec.covered[0]},
                  {"vanishing_h", rec.covered[1]},
                  {"nonvanishing_w", rec.covered[2]},
                  {"nonvanishing_h", rec.covered[3]}};
  return j;
}

void write_metrics_csv(std::ostream& out, const SimDesign& d, const ReplicationMetrics& m) {
  const auto tau = d.tau0();
  out << "tw,th,p,s,tau_w,tau_h,rho,noise,reps,alpha,seed,"
         "bias_w,rmse_w,bias_h,rmse_h,"
         "coverage_v_w,me_v_w,coverage_v_h,me_v_h,"
         "coverage_nv_w,me_nv_w,coverage_nv_h,me_nv_h,refused\n";
  out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},", d.tw, d.th, d.p, d.s, tau.w, tau.h, d.rho, to_string(d.noise),
                     m.n_reps, d.alpha, d.seed);
  out << fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},", m.bias_w, m.rmse_w, m.bias_h, m.rmse_h);
  out << fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},", m.coverage_v_w, m.avg_me_v_w, m.coverage_v_h, m.avg_me_v_h);
  out << fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{}\n", m.coverage_nv_w, m.avg_me_nv_w, m.coverage_nv_h, m.avg_me_nv_h,
                     m.n_refused);
}

}  // namespace gridseg::io
