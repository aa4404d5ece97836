#ifndef QHIST_DISTRIBUTION_HPP
#define QHIST_DISTRIBUTION_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

#include <cmath>
#include <stdexcept>

namespace qhist {

// Discrete probability table over named, labeled axes, stored row-major with
// the first axis slowest. Carries joint distributions Pr(A,B,a,b) and master
// distributions Pr(A,B,a,b,λ) alike.
class LabeledDistribution {
public:
    struct Axis {
        std::string name;
        std::vector<std::string> labels;
    };

    LabeledDistribution() = default;

    LabeledDistribution(std::vector<Axis> axes, std::vector<double> values)
        : axes_(std::move(axes)), values_(std::move(values)) {
        size_t expect = 1;
        for (const auto& ax : axes_) {
            if (ax.labels.empty())
                throw std::invalid_argument("LabeledDistribution: axis '" + ax.name + "' has no labels");
            expect *= ax.labels.size();
        }
        if (values_.size() != expect)
            throw std::invalid_argument("LabeledDistribution: value count does not match axes");
        for (auto& v : values_) {
            if (std::isnan(v) || std::isinf(v))
                throw std::invalid_argument("LabeledDistribution: non-finite probability");
            if (v < -1e-14)
                throw std::invalid_argument("LabeledDistribution: negative probability " +
                                            std::to_string(v));
            if (v < 0) v = 0;  // clamp roundoff dust
        }
    }

    // validated constructor for distributions that must be normalized
    static LabeledDistribution normalized(std::vector<Axis> axes, std::vector<double> values,
                                          double tol = 1e-10) {
        LabeledDistribution d(std::move(axes), std::move(values));
        if (std::abs(d.total() - 1.0) > tol)
            throw std::invalid_argument("LabeledDistribution: total mass " +
                                        std::to_string(d.total()) + " is not 1");
        return d;
    }

    const std::vector<Axis>& axes() const { return axes_; }
    const std::vector<double>& values() const { return values_; }
    size_t size() const { return values_.size(); }

    double total() const {
        double s = 0;
        for (double v : values_) s += v;
        return s;
    }

    int axis_index(const std::string& name) const {
        for (size_t i = 0; i < axes_.size(); ++i)
            if (axes_[i].name == name) return static_cast<int>(i);
        throw std::invalid_argument("LabeledDistribution: unknown axis '" + name + "'");
    }

    int label_index(const std::string& axis, const std::string& label) const {
        const auto& ax = axes_[static_cast<size_t>(axis_index(axis))];
        for (size_t i = 0; i < ax.labels.size(); ++i)
            if (ax.labels[i] == label) return static_cast<int>(i);
        throw std::invalid_argument("LabeledDistribution: unknown label '" + label +
                                    "' on axis '" + axis + "'");
    }

    size_t flatten(std::span<const int> digits) const {
        size_t flat = 0;
        for (size_t k = 0; k < axes_.size(); ++k)
            flat = flat * axes_[k].labels.size() + static_cast<size_t>(digits[k]);
        return flat;
    }

    std::vector<int> unflatten(size_t flat) const {
        std::vector<int> digits(axes_.size());
        for (size_t k = axes_.size(); k-- > 0;) {
            digits[k] = static_cast<int>(flat % axes_[k].labels.size());
            flat /= axes_[k].labels.size();
        }
        return digits;
    }

    double at(std::span<const int> digits) const { return values_[flatten(digits)]; }

    double at(const std::map<std::string, std::string>& assignment) const {
        std::vector<int> digits(axes_.size());
        for (size_t k = 0; k < axes_.size(); ++k) {
            const auto it = assignment.find(axes_[k].name);
            if (it == assignment.end())
                throw std::invalid_argument("LabeledDistribution::at: axis '" + axes_[k].name +
                                            "' not assigned");
            digits[k] = label_index(axes_[k].name, it->second);
        }
        return at(digits);
    }

    // Sum out every axis not in `keep`; result axes follow the order of `keep`.
    LabeledDistribution marginal(const std::vector<std::string>& keep) const {
        std::vector<int> kept_axes;
        std::vector<Axis> out_axes;
        for (const auto& name : keep) {
            kept_axes.push_back(axis_index(name));
            out_axes.push_back(axes_[static_cast<size_t>(kept_axes.back())]);
        }
        size_t out_size = 1;
        for (const auto& ax : out_axes) out_size *= ax.labels.size();
        std::vector<double> out(out_size, 0.0);
        for (size_t flat = 0; flat < values_.size(); ++flat) {
            const auto digits = unflatten(flat);
            size_t of = 0;
            for (size_t k = 0; k < kept_axes.size(); ++k)
                of = of * out_axes[k].labels.size() +
                     static_cast<size_t>(digits[static_cast<size_t>(kept_axes[k])]);
            out[of] += values_[flat];
        }
        return LabeledDistribution(std::move(out_axes), std::move(out));
    }

    // Condition on axis=label assignments, keep the remaining axes, normalize.
    LabeledDistribution conditional(const std::map<std::string, std::string>& given) const {
        std::vector<int> fixed_axis(axes_.size(), -1);
        for (const auto& [name, label] : given)
            fixed_axis[static_cast<size_t>(axis_index(name))] = label_index(name, label);

        std::vector<Axis> out_axes;
        std::vector<size_t> free_axes;
        for (size_t k = 0; k < axes_.size(); ++k)
            if (fixed_axis[k] < 0) {
                out_axes.push_back(axes_[k]);
                free_axes.push_back(k);
            }
        if (out_axes.empty())
            throw std::invalid_argument("LabeledDistribution::conditional: nothing left to keep");

        size_t out_size = 1;
        for (const auto& ax : out_axes) out_size *= ax.labels.size();
        std::vector<double> out(out_size, 0.0);
        double mass = 0;
        for (size_t flat = 0; flat < values_.size(); ++flat) {
            const auto digits = unflatten(flat);
            bool match = true;
            for (size_t k = 0; k < axes_.size(); ++k)
                if (fixed_axis[k] >= 0 && digits[k] != fixed_axis[k]) {
                    match = false;
                    break;
                }
            if (!match) continue;
            size_t of = 0;
            for (size_t k = 0; k < free_axes.size(); ++k)
                of = of * out_axes[k].labels.size() + static_cast<size_t>(digits[free_axes[k]]);
            out[of] += values_[flat];
            mass += values_[flat];
        }
        if (mass <= 1e-14)
            throw std::domain_error(
                "LabeledDistribution::conditional: conditioning event has zero probability");
        for (auto& v : out) v /= mass;
        return LabeledDistribution(std::move(out_axes), std::move(out));
    }

    double max_abs_difference(const LabeledDistribution& other) const {
        if (values_.size() != other.values_.size())
            throw std::invalid_argument("LabeledDistribution: size mismatch in comparison");
        double m = 0;
        for (size_t i = 0; i < values_.size(); ++i)
            m = std::max(m, std::abs(values_[i] - other.values_[i]));
        return m;
    }

private:
    std::vector<Axis> axes_;
    std::vector<double> values_;
};

// Marginalize to `keep` after conditioning on `given` (either may be empty;
// conditioning on nothing is the identity).
inline LabeledDistribution marginal_conditional(const LabeledDistribution& dist,
                                                const std::vector<std::string>& keep,
                                                const std::map<std::string, std::string>& given) {
    const LabeledDistribution base = given.empty() ? dist : dist.conditional(given);
    return base.marginal(keep);
}

// Independence of the hidden variable from the setting choices:
// |Pr(λ|a,b) - Pr(λ)| <= tol wherever Pr(a,b) > 1e-14.
struct IndependenceResult {
    bool independent = false;
    double worst_residual = 0;
};

inline IndependenceResult independence_check(const LabeledDistribution& dist, double tol,
                                             const std::string& lambda_axis = "lambda",
                                             const std::string& a_axis = "a",
                                             const std::string& b_axis = "b") {
    const auto pr_lambda = dist.marginal({lambda_axis});
    const auto pr_ab = dist.marginal({a_axis, b_axis});
    const auto& a_labels = dist.axes()[static_cast<size_t>(dist.axis_index(a_axis))].labels;
    const auto& b_labels = dist.axes()[static_cast<size_t>(dist.axis_index(b_axis))].labels;
    const auto& l_labels = dist.axes()[static_cast<size_t>(dist.axis_index(lambda_axis))].labels;

    double worst = 0;
    for (size_t ia = 0; ia < a_labels.size(); ++ia)
        for (size_t ib = 0; ib < b_labels.size(); ++ib) {
            const std::vector<int> ab{static_cast<int>(ia), static_cast<int>(ib)};
            if (pr_ab.at(ab) <= 1e-14) continue;
            const auto cond = dist.conditional({{a_axis, a_labels[ia]}, {b_axis, b_labels[ib]}})
                                  .marginal({lambda_axis});
            for (size_t il = 0; il < l_labels.size(); ++il) {
                const std::vector<int> l{static_cast<int>(il)};
                worst = std::max(worst, std::abs(cond.at(l) - pr_lambda.at(l)));
            }
        }
    return IndependenceResult{worst <= tol, worst};
}

}  // namespace qhist

#endif
