#include "fundbench/dea.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <sstream>
#include <thread>

namespace fundbench::dea {

std::string_view to_string(ReturnsToScale rts) { return rts == ReturnsToScale::Constant ? "crs" : "vrs"; }
std::string_view to_string(Orientation o) { return o == Orientation::Input ? "input" : "output"; }
std::string_view to_string(SlackStage s) { return s == SlackStage::Off ? "off" : "maximize"; }
std::string_view to_string(Positivity p) { return p == Positivity::Strict ? "strict" : "translate"; }

void DeaConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1e-3)) {
        throw std::invalid_argument("epsilon must lie in [0, 1e-3]");
    }
}

void DeaDataset::validate(Positivity positivity) const {
    const auto n = static_cast<Eigen::Index>(dmu_ids.size());
    if (n < 1) throw DataError(DataErrorKind::Shape, "dataset has no DMUs");
    if (inputs.rows() < 1) throw DataError(DataErrorKind::Shape, "dataset has no inputs");
    if (outputs.rows() < 1) throw DataError(DataErrorKind::Shape, "dataset has no outputs");
    if (inputs.cols() != n || outputs.cols() != n) {
        throw DataError(DataErrorKind::Shape, "matrix column count does not match the number of DMUs");
    }
    if (static_cast<std::size_t>(inputs.rows()) != input_names.size() ||
        static_cast<std::size_t>(outputs.rows()) != output_names.size()) {
        throw DataError(DataErrorKind::Shape, "variable names do not match matrix rows");
    }
    auto check = [&](const Eigen::MatrixXd& m, const std::vector<std::string>& names, std::string_view kind) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                const double value = m(i, j);
                const auto& dmu = dmu_ids[static_cast<std::size_t>(j)];
                const auto& var = names[static_cast<std::size_t>(i)];
                std::ostringstream where;
                where << kind << " '" << var << "' of DMU '" << dmu << "' (row " << i << ", column " << j << ")";
                if (!std::isfinite(value)) {
                    throw DataError(DataErrorKind::NonFinite, "non-finite " + where.str(), dmu, var);
                }
                if (positivity == Positivity::Strict && value <= 0.0) {
                    std::ostringstream msg;
                    msg << "nonpositive value " << value << " for " << where.str();
                    throw DataError(DataErrorKind::NonPositive, msg.str(), dmu, var);
                }
            }
        }
    };
    check(inputs, input_names, "input");
    check(outputs, output_names, "output");
}

void DeaDataset::append_dmu(std::string id, std::span<const double> input_values,
                            std::span<const double> output_values) {
    if (inputs.cols() == 0 && outputs.cols() == 0) {
        inputs.resize(static_cast<Eigen::Index>(input_names.size()), 0);
        outputs.resize(static_cast<Eigen::Index>(output_names.size()), 0);
    }
    if (input_values.size() != num_inputs() || output_values.size() != num_outputs()) {
        throw DataError(DataErrorKind::Shape, "appended DMU '" + id + "' has the wrong number of values");
    }
    const Eigen::Index j = inputs.cols();
    inputs.conservativeResize(Eigen::NoChange, j + 1);
    outputs.conservativeResize(Eigen::NoChange, j + 1);
    for (std::size_t i = 0; i < input_values.size(); ++i) inputs(static_cast<Eigen::Index>(i), j) = input_values[i];
    for (std::size_t r = 0; r < output_values.size(); ++r) {
        outputs(static_cast<Eigen::Index>(r), j) = output_values[r];
    }
    dmu_ids.push_back(std::move(id));
}

std::vector<Translation> translate_nonpositive(DeaDataset& data) {
    std::vector<Translation> out;
    auto shift_rows = [&](Eigen::MatrixXd& m, const std::vector<std::string>& names, bool is_output) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double lo = m.row(i).minCoeff();
            if (lo > 0.0) continue;
            const double shift = std::abs(lo) + 1.0;
            m.row(i).array() += shift;
            out.push_back({names[static_cast<std::size_t>(i)], is_output, shift});
        }
    };
    shift_rows(data.inputs, data.input_names, false);
    shift_rows(data.outputs, data.output_names, true);
    return out;
}

lp::LinearProgram build_multiplier_lp(std::size_t j0, const DeaDataset& data, const DeaConfig& cfg) {
    cfg.validate();
    const std::size_t n = data.num_dmus();
    const std::size_t m = data.num_inputs();
    const std::size_t t = data.num_outputs();
    if (j0 >= n) throw std::out_of_range("DMU index out of range");
    const bool vrs = cfg.returns_to_scale == ReturnsToScale::Variable;
    const bool input = cfg.orientation == Orientation::Input;
    const std::size_t num_vars = t + m + (vrs ? 1 : 0);
    const std::size_t w = t + m;
    const auto col0 = static_cast<Eigen::Index>(j0);

    std::vector<double> objective(num_vars, 0.0);
    std::vector<double> normalization(num_vars, 0.0);
    for (std::size_t r = 0; r < t; ++r) {
        const double y0 = data.outputs(static_cast<Eigen::Index>(r), col0);
        (input ? objective : normalization)[r] = y0;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double x0 = data.inputs(static_cast<Eigen::Index>(i), col0);
        (input ? normalization : objective)[t + i] = x0;
    }
    if (vrs) objective[w] = 1.0;

    lp::LinearProgram lp(input ? lp::Sense::Maximize : lp::Sense::Minimize, std::move(objective));
    lp.add_constraint(std::move(normalization), lp::Relation::Equal, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> row(num_vars, 0.0);
        const auto col = static_cast<Eigen::Index>(j);
        for (std::size_t r = 0; r < t; ++r) row[r] = data.outputs(static_cast<Eigen::Index>(r), col);
        for (std::size_t i = 0; i < m; ++i) row[t + i] = -data.inputs(static_cast<Eigen::Index>(i), col);
        if (vrs) row[w] = input ? 1.0 : -1.0;
        lp.add_constraint(std::move(row), lp::Relation::LessEqual, 0.0);
    }
    for (std::size_t k = 0; k < t + m; ++k) lp.set_lower_bound(k, cfg.epsilon);
    if (vrs) lp.set_lower_bound(w, lp::kFree);
    return lp;
}

lp::LinearProgram build_envelopment_lp(std::size_t j0, const DeaDataset& data, const DeaConfig& cfg) {
    cfg.validate();
    const std::size_t n = data.num_dmus();
    const std::size_t m = data.num_inputs();
    const std::size_t t = data.num_outputs();
    if (j0 >= n) throw std::out_of_range("DMU index out of range");
    const bool vrs = cfg.returns_to_scale == ReturnsToScale::Variable;
    const bool input = cfg.orientation == Orientation::Input;
    const bool slacks = cfg.slack_stage == SlackStage::Maximize;
    const std::size_t num_vars = 1 + n + (slacks ? m + t : 0);
    const auto col0 = static_cast<Eigen::Index>(j0);

    std::vector<double> objective(num_vars, 0.0);
    objective[0] = 1.0;
    lp::LinearProgram lp(input ? lp::Sense::Minimize : lp::Sense::Maximize, std::move(objective));
    lp.set_lower_bound(0, lp::kFree);

    for (std::size_t i = 0; i < m; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        std::vector<double> row(num_vars, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[1 + j] = data.inputs(ii, static_cast<Eigen::Index>(j));
        double rhs = 0.0;
        if (input) {
            row[0] = -data.inputs(ii, col0);
        } else {
            rhs = data.inputs(ii, col0);
        }
        if (slacks) row[1 + n + i] = 1.0;
        lp.add_constraint(std::move(row), slacks ? lp::Relation::Equal : lp::Relation::LessEqual, rhs);
    }
    for (std::size_t r = 0; r < t; ++r) {
        const auto rr = static_cast<Eigen::Index>(r);
        std::vector<double> row(num_vars, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[1 + j] = data.outputs(rr, static_cast<Eigen::Index>(j));
        double rhs = 0.0;
        if (input) {
            rhs = data.outputs(rr, col0);
        } else {
            row[0] = -data.outputs(rr, col0);
        }
        if (slacks) row[1 + n + m + r] = -1.0;
        lp.add_constraint(std::move(row), slacks ? lp::Relation::Equal : lp::Relation::GreaterEqual, rhs);
    }
    if (vrs) {
        std::vector<double> row(num_vars, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[1 + j] = 1.0;
        lp.add_constraint(std::move(row), lp::Relation::Equal, 1.0);
    }
    return lp;
}

EfficiencyResult efficiency(std::size_t j0, const DeaDataset& data, const DeaConfig& cfg) {
    const std::size_t n = data.num_dmus();
    const std::size_t m = data.num_inputs();
    const std::size_t t = data.num_outputs();
    const bool input = cfg.orientation == Orientation::Input;
    const bool slack_stage = cfg.slack_stage == SlackStage::Maximize;

    const lp::LinearProgram envelopment = build_envelopment_lp(j0, data, cfg);
    lp::LpSolution env;
    if (slack_stage) {
        // Same sense as the primary: minimizing theta pairs with minimizing
        // minus the slack sum, maximizing phi with maximizing the slack sum.
        std::vector<double> secondary(envelopment.num_vars(), 0.0);
        for (std::size_t k = 1 + n; k < secondary.size(); ++k) secondary[k] = input ? -1.0 : 1.0;
        env = lp::solve_lexicographic(envelopment, secondary);
    } else {
        env = lp::solve(envelopment);
    }
    if (!env.optimal()) {
        throw InfeasibleModel("envelopment program for DMU '" + data.dmu_ids[j0] + "' is " +
                              std::string(lp::to_string(env.status)));
    }

    EfficiencyResult res;
    res.dmu_id = data.dmu_ids[j0];
    const double radial = env.primal_values[0];
    res.envelopment_objective = radial;
    res.score = input ? radial : 1.0 / radial;

    const auto col0 = static_cast<Eigen::Index>(j0);
    Eigen::VectorXd lambda(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        const double l = env.primal_values[1 + j];
        lambda(static_cast<Eigen::Index>(j)) = l;
        if (l > kPeerThreshold) res.reference_set.push_back({data.dmu_ids[j], j, l});
    }
    const Eigen::VectorXd composite_in = data.inputs * lambda;
    const Eigen::VectorXd composite_out = data.outputs * lambda;

    res.input_slacks.resize(m);
    res.output_slacks.resize(t);
    res.projection.inputs.resize(m);
    res.projection.outputs.resize(t);
    for (std::size_t i = 0; i < m; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double x0 = data.inputs(ii, col0);
        const double target = input ? radial * x0 : x0;
        res.input_slacks[i] = slack_stage ? env.primal_values[1 + n + i] : std::max(0.0, target - composite_in(ii));
        res.projection.inputs[i] = slack_stage ? target - res.input_slacks[i] : target;
    }
    for (std::size_t r = 0; r < t; ++r) {
        const auto rr = static_cast<Eigen::Index>(r);
        const double y0 = data.outputs(rr, col0);
        const double target = input ? y0 : radial * y0;
        res.output_slacks[r] =
            slack_stage ? env.primal_values[1 + n + m + r] : std::max(0.0, composite_out(rr) - target);
        res.projection.outputs[r] = slack_stage ? target + res.output_slacks[r] : target;
    }

    const lp::LpSolution mult = lp::solve(build_multiplier_lp(j0, data, cfg));
    if (mult.optimal()) {
        res.multiplier_objective = mult.objective_value;
        res.output_weights.assign(mult.primal_values.begin(), mult.primal_values.begin() + static_cast<long>(t));
        res.input_weights.assign(mult.primal_values.begin() + static_cast<long>(t),
                                 mult.primal_values.begin() + static_cast<long>(t + m));
        if (cfg.returns_to_scale == ReturnsToScale::Variable) res.intercept = mult.primal_values[t + m];
    }
    return res;
}

ScenarioRunError::ScenarioRunError(std::vector<Failure> failures)
    : std::runtime_error([&] {
          std::string msg = std::to_string(failures.size()) + " DMU(s) failed:";
          for (const auto& f : failures) msg += " [" + f.dmu_id + ": " + f.message + "]";
          return msg;
      }()),
      failures_(std::move(failures)) {}

std::vector<EfficiencyResult> run_scenario(const DeaDataset& data, const DeaConfig& cfg,
                                           std::string_view scenario_name) {
    cfg.validate();
    data.validate(cfg.positivity);
    const std::size_t n = data.num_dmus();
    std::vector<std::optional<EfficiencyResult>> slots(n);
    std::vector<std::string> errors(n);

    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t j = begin; j < n; j += stride) {
            try {
                slots[j] = efficiency(j, data, cfg);
                slots[j]->scenario_name = std::string(scenario_name);
            } catch (const std::exception& e) {
                errors[j] = e.what();
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
    if (workers == 1 || n < 16) {
        work(0, 1);
    } else {
        std::vector<std::future<void>> tasks;
        for (std::size_t w = 0; w < workers; ++w) tasks.push_back(std::async(std::launch::async, work, w, workers));
        for (auto& task : tasks) task.get();
    }

    std::vector<ScenarioRunError::Failure> failures;
    std::vector<EfficiencyResult> results;
    results.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (slots[j]) {
            results.push_back(std::move(*slots[j]));
        } else {
            failures.push_back({data.dmu_ids[j], errors[j]});
        }
    }
    if (!failures.empty()) throw ScenarioRunError(std::move(failures));
    return results;
}

std::vector<RankEntry> rank(std::span<const EfficiencyResult> results) {
    std::vector<RankEntry> order;
    order.reserve(results.size());
    for (const auto& r : results) order.push_back({r.dmu_id, 0, r.score});
    std::stable_sort(order.begin(), order.end(), [](const RankEntry& a, const RankEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.dmu_id < b.dmu_id;
    });
    // Re-sort ties (within tolerance of the group leader) by id.
    std::size_t group_start = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (order[k].score < order[group_start].score - kRankTieTolerance) {
            std::sort(order.begin() + static_cast<long>(group_start), order.begin() + static_cast<long>(k),
                      [](const RankEntry& a, const RankEntry& b) { return a.dmu_id < b.dmu_id; });
            group_start = k;
        }
        order[k].rank = static_cast<int>(group_start) + 1;
    }
    std::sort(order.begin() + static_cast<long>(group_start), order.end(),
              [](const RankEntry& a, const RankEntry& b) { return a.dmu_id < b.dmu_id; });
    return order;
}

}  // namespace fundbench::dea
