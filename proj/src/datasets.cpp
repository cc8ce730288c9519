#include "mhd/datasets.hpp"

#include <cmath>
#include <numbers>

namespace mhd {

MultipointDataset gen_multipoint(std::size_t n_targets, Rng& rng, std::size_t input_dim,
                                 std::size_t output_dim) {
    if (n_targets < 1) throw ValueError("gen_multipoint: need at least one target");
    MultipointDataset ds;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ds.input = Tensor::zeros({input_dim});
    for (double& v : ds.input.data) v = normal(rng);
    for (std::size_t i = 0; i < n_targets; ++i) {
        Tensor t = Tensor::zeros({output_dim});
        for (double& v : t.data) v = unif(rng);
        ds.targets.push_back(std::move(t));
    }
    return ds;
}

double sine_forward(double y) { return y + 0.3 * std::sin(2.0 * std::numbers::pi * y); }

std::vector<SinePoint> gen_inverse_sine(std::size_t count, Rng& rng) {
    if (count < 2) throw ValueError("gen_inverse_sine: need at least two points");
    std::uniform_real_distribution<double> eps(-0.1, 0.1);
    std::vector<SinePoint> data;
    data.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double y = double(i + 1) / double(count + 1);  // evenly spaced in (0,1)
        data.push_back({sine_forward(y) + eps(rng), y});
    }
    return data;
}

std::vector<double> sine_branches(double x, std::size_t grid) {
    std::vector<double> roots;
    double prev_y = 0.0;
    double prev_f = sine_forward(prev_y) - x;
    for (std::size_t i = 1; i <= grid; ++i) {
        double y = double(i) / double(grid);
        double f = sine_forward(y) - x;
        if (prev_f == 0.0) roots.push_back(prev_y);
        if (prev_f * f < 0.0) {
            double lo = prev_y, hi = y;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                if ((sine_forward(lo) - x) * (sine_forward(mid) - x) <= 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        prev_y = y;
        prev_f = f;
    }
    return roots;
}

std::pair<double, double> sine_multivalued_region() {
    // dx/dy = 1 + 0.6 pi cos(2 pi y) vanishes at the fold points.
    double c = -1.0 / (0.6 * std::numbers::pi);
    double y1 = std::acos(c) / (2.0 * std::numbers::pi);  // in (0, 0.5)
    double y2 = 1.0 - y1;
    // x at the folds: the region between the local max and local min of x(y).
    return {sine_forward(y2), sine_forward(y1)};
}

GaussianMixtureSpec default_gmm_spec() {
    GaussianMixtureSpec spec;
    spec.components = {
        {Tensor::vector({0.25, 0.25}), Tensor::vector({0.05, 0.04}), 0.4},
        {Tensor::vector({0.75, 0.35}), Tensor::vector({0.04, 0.06}), 0.35},
        {Tensor::vector({0.45, 0.80}), Tensor::vector({0.06, 0.05}), 0.25},
    };
    return spec;
}

GmmDataset gen_gaussian_mixture(Rng& rng, std::size_t count, const GaussianMixtureSpec& spec) {
    if (spec.components.empty()) throw ValueError("gen_gaussian_mixture: empty mixture spec");
    std::vector<double> weights;
    for (const GaussianComponent& c : spec.components) weights.push_back(c.weight);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::normal_distribution<double> unit(0.0, 1.0);
    GmmDataset ds;
    ds.truth = spec;
    ds.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const GaussianComponent& c = spec.components[pick(rng)];
        Tensor s = c.mean;
        for (std::size_t d = 0; d < s.size(); ++d) s[d] += c.sd[d] * unit(rng);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

Tensor elementwise_sd(const std::vector<Tensor>& set) {
    if (set.empty()) throw ValueError("elementwise_sd: empty set");
    Tensor mean = Tensor::zeros(set.front().shape);
    for (const Tensor& t : set) {
        require_same_shape(mean, t, "elementwise_sd");
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += t[i];
    }
    for (double& v : mean.data) v /= double(set.size());
    Tensor var = Tensor::zeros(mean.shape);
    for (const Tensor& t : set)
        for (std::size_t i = 0; i < var.size(); ++i) {
            double d = t[i] - mean[i];
            var[i] += d * d;
        }
    for (double& v : var.data) v = std::sqrt(v / double(set.size()));
    return var;
}

double sdd(const std::vector<std::vector<Tensor>>& predicted,
           const std::vector<std::vector<Tensor>>& targets) {
    if (predicted.empty() || predicted.size() != targets.size())
        throw ValueError("sdd: need the same nonzero number of trials on both sides");
    double acc = 0.0;
    for (std::size_t k = 0; k < predicted.size(); ++k) {
        Tensor sp = elementwise_sd(predicted[k]);
        Tensor st = elementwise_sd(targets[k]);
        require_same_shape(sp, st, "sdd");
        double norm = 0.0;
        for (std::size_t i = 0; i < sp.size(); ++i) {
            double d = sp[i] - st[i];
            norm += d * d;
        }
        acc += std::sqrt(norm);
    }
    return acc / double(predicted.size());
}

}  // namespace mhd
