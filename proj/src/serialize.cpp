#include "regflow/serialize.hpp"

namespace regflow {

nlohmann::json point_json(const Point& p) {
    auto arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) arr.push_back(p[i]);
    return arr;
}

Point json_point(const nlohmann::json& j) {
    if (!j.is_array()) throw UsageError("expected an array of numbers");
    Point p(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw UsageError("expected an array of numbers");
        p[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return p;
}

std::string to_string(RegularityMode mode) { return mode == RegularityMode::linear ? "linear" : "hoelder"; }

std::string to_string(DecayModel model) { return model == DecayModel::exponential ? "exponential" : "powerlaw"; }

std::string to_string(DecayMetric metric) {
    switch (metric) {
    case DecayMetric::residual: return "residual";
    case DecayMetric::dist_fix: return "dist_fix";
    case DecayMetric::dist_to_limit: return "dist_to_limit";
    }
    return "unknown";
}

void to_json(nlohmann::json& j, const Region& r) { j = {{"center", point_json(r.center)}, {"radius", r.radius}}; }

void to_json(nlohmann::json& j, const RegularityEstimate& e) {
    j = {{"mode", to_string(e.mode)},
         {"kappa", e.kappa},
         {"gamma", e.gamma},
         {"region", e.region},
         {"n_samples", e.n_samples},
         {"max_violation", e.max_violation},
         {"excluded", e.excluded}};
}

void to_json(nlohmann::json& j, const CollectionEstimate& e) {
    j = {{"mode", to_string(e.mode)},
         {"tau", e.tau},
         {"theta", e.theta},
         {"region", e.region},
         {"n_samples", e.n_samples},
         {"max_violation", e.max_violation},
         {"excluded", e.excluded}};
}

void to_json(nlohmann::json& j, const InequalityReport& r) {
    j = {{"name", r.name},
         {"n_points", r.n_points},
         {"worst_slack", r.worst_slack},
         {"tolerance", r.tolerance},
         {"passed", r.passed},
         {"excluded", r.excluded}};
}

void to_json(nlohmann::json& j, const RateFit& f) {
    j = {{"model", to_string(f.model)},
         {"M", f.M},
         {"rate", f.rate},
         {"rss", f.rss},
         {"n_points", f.n_points},
         {"fit_window", {f.t_min, f.t_max}},
         {"already_converged", f.already_converged}};
}

void to_json(nlohmann::json& j, const ModelSelection& s) {
    j = {{"exponential", s.exponential}, {"powerlaw", s.powerlaw}, {"chosen", to_string(s.chosen)}};
}

void to_json(nlohmann::json& j, const BoundCheck& b) {
    j = {{"bound_name", b.bound_name},
         {"n_points", b.n_points},
         {"worst_margin", b.worst_margin},
         {"tolerance", b.tolerance},
         {"passed", b.passed}};
}

void to_json(nlohmann::json& j, const HoelderBoundResult& h) {
    j = {{"M0", h.M0}, {"exponent", h.exponent}, {"checks", h.checks}};
}

} // namespace regflow
