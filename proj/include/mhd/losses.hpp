#pragma once

#include "mhd/dropout.hpp"

namespace mhd {

// Which hypothesis won and the distances it was chosen from.
// Ties resolve to the lowest index.
struct WinnerSelection {
    std::size_t winner_index = 0;
    std::vector<double> distances;
};

struct WtaResult {
    Var loss;
    WinnerSelection selection;
};

// Squared L2 to the closest hypothesis; gradients flow only through the winner.
WtaResult wta_loss(Tape& tape, const std::vector<Var>& hypotheses, Var target);

// -log(phi_winner) * ||target - winner||^2. Coefficients must be a softmax
// output (positive, summing to 1); the gradient reaches both the winning
// hypothesis and the coefficient layer.
WtaResult mixture_wta_loss(Tape& tape, const std::vector<Var>& hypotheses, Var coefficients,
                           Var target);

// Samples subset_size masks, computes their hypotheses and applies WTA over
// the subset. When subset_size equals the full subnetwork count the masks are
// enumerated instead of sampled, so the loss coincides with vanilla WTA over
// all subnetworks.
WtaResult swta_loss(const MHDropoutNetwork& net, Tape& tape, Var input, Var target, Rng& rng);

// Same, over an explicit mask list.
WtaResult swta_loss_with_masks(const MHDropoutNetwork& net, Tape& tape, Var input, Var target,
                               const std::vector<DropoutMask>& masks);

struct MomWinner {
    std::size_t component = 0;   // m*
    std::size_t hypothesis = 0;  // t*
    double distance = 0.0;
};

struct MomLossResult {
    Var loss;
    MomWinner winner;
};

// Combined loss over an M x T hypothesis grid:
//   -lambda * log(phi_{m*}) + ||target - grid[m*][t*]||^2
// for the single grid-global closest hypothesis (m*, t*); ties resolve to the
// smallest (m, then t). Gradients flow only through that hypothesis and phi_{m*}.
MomLossResult mom_loss(Tape& tape, const std::vector<std::vector<Var>>& grid, Var coefficients,
                       Var target, double lambda);

}  // namespace mhd
