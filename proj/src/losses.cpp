#include "mhd/losses.hpp"

#include <cmath>

namespace mhd {

namespace {

double distance_value(Tape& tape, Var a, Var b) {
    const Tensor& ta = tape.value(a);
    const Tensor& tb = tape.value(b);
    require_same_shape(ta, tb, "wta distance");
    double acc = 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        double d = ta[i] - tb[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

WtaResult wta_loss(Tape& tape, const std::vector<Var>& hypotheses, Var target) {
    if (hypotheses.empty()) throw ValueError("wta_loss: empty hypothesis list");
    WinnerSelection sel;
    sel.distances.reserve(hypotheses.size());
    for (Var h : hypotheses) sel.distances.push_back(distance_value(tape, h, target));
    for (std::size_t i = 1; i < sel.distances.size(); ++i)
        if (sel.distances[i] < sel.distances[sel.winner_index]) sel.winner_index = i;
    Var loss = tape.squared_l2(hypotheses[sel.winner_index], target);
    return {loss, std::move(sel)};
}

WtaResult mixture_wta_loss(Tape& tape, const std::vector<Var>& hypotheses, Var coefficients,
                           Var target) {
    if (hypotheses.empty()) throw ValueError("mixture_wta_loss: empty hypothesis list");
    const Tensor& phi = tape.value(coefficients);
    if (phi.size() != hypotheses.size())
        throw DimensionError("mixture_wta_loss: " + std::to_string(phi.size()) +
                             " coefficients for " + std::to_string(hypotheses.size()) +
                             " hypotheses");
    double sum = 0.0;
    for (double v : phi.data) {
        if (v <= 0.0) throw ValueError("mixture_wta_loss: coefficients must be positive");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValueError("mixture_wta_loss: coefficients must sum to 1");

    WtaResult base = wta_loss(tape, hypotheses, target);
    Var neg_log = tape.scale(tape.log(tape.select(coefficients, base.selection.winner_index)), -1.0);
    Var loss = tape.mul(neg_log, base.loss);
    return {loss, std::move(base.selection)};
}

WtaResult swta_loss(const MHDropoutNetwork& net, Tape& tape, Var input, Var target, Rng& rng) {
    std::vector<DropoutMask> masks = net.subset_size >= net.subnetwork_count()
                                         ? enumerate_masks(net)
                                         : sample_masks(net, net.subset_size, rng);
    return swta_loss_with_masks(net, tape, input, target, masks);
}

WtaResult swta_loss_with_masks(const MHDropoutNetwork& net, Tape& tape, Var input, Var target,
                               const std::vector<DropoutMask>& masks) {
    std::vector<Var> hyps = hypotheses(net, tape, input, masks);
    return wta_loss(tape, hyps, target);
}

MomLossResult mom_loss(Tape& tape, const std::vector<std::vector<Var>>& grid, Var coefficients,
                       Var target, double lambda) {
    if (lambda <= 0.0) throw ValueError("mom_loss: lambda must be positive");
    if (grid.empty() || grid.front().empty()) throw ValueError("mom_loss: empty hypothesis grid");
    const Tensor& phi = tape.value(coefficients);
    if (phi.size() != grid.size())
        throw DimensionError("mom_loss: " + std::to_string(phi.size()) + " coefficients for " +
                             std::to_string(grid.size()) + " components");

    MomWinner best;
    best.distance = distance_value(tape, grid[0][0], target);
    for (std::size_t m = 0; m < grid.size(); ++m)
        for (std::size_t t = 0; t < grid[m].size(); ++t) {
            double d = distance_value(tape, grid[m][t], target);
            if (d < best.distance) best = {m, t, d};
        }

    Var log_phi = tape.log(tape.select(coefficients, best.component));
    Var loss = tape.add(tape.scale(log_phi, -lambda),
                        tape.squared_l2(grid[best.component][best.hypothesis], target));
    return {loss, best};
}

}  // namespace mhd
