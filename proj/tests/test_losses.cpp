#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mhd/losses.hpp"

using namespace mhd;

namespace {

MHDropoutNetwork make_242(Rng& rng) {
    MHDropoutNetwork net;
    net.net = make_mlp(2, {{4, Activation::Sigmoid, true}, {2, Activation::Sigmoid, false}}, rng,
                       1.0);
    net.keep_prob = 0.5;
    net.subset_size = 4;
    return net;
}

}  // namespace

TEST_CASE("wta_loss basics") {
    Tape tape;
    Var target = tape.constant(Tensor::vector({0.9, 0.9}));
    std::vector<Var> hyps = {tape.constant(Tensor::vector({0, 0})),
                             tape.constant(Tensor::vector({1, 1}))};
    WtaResult res = wta_loss(tape, hyps, target);
    CHECK(res.selection.winner_index == 1);
    CHECK(tape.value(res.loss)[0] == doctest::Approx(0.02));

    // Exact hit wins with zero loss.
    std::vector<Var> with_exact = {tape.constant(Tensor::vector({5, 5})),
                                   tape.constant(Tensor::vector({0.9, 0.9}))};
    WtaResult exact = wta_loss(tape, with_exact, target);
    CHECK(exact.selection.winner_index == 1);
    CHECK(tape.value(exact.loss)[0] == 0.0);

    // Single hypothesis reduces to squared_l2.
    std::vector<Var> one = {tape.constant(Tensor::vector({0, 0}))};
    WtaResult single = wta_loss(tape, one, target);
    CHECK(tape.value(single.loss)[0] ==
          doctest::Approx(tape.value(tape.squared_l2(one[0], target))[0]));

    CHECK_THROWS_AS(wta_loss(tape, {}, target), ValueError);
}

TEST_CASE("wta_loss winner distance is minimal and ties go to the lowest index") {
    Tape tape;
    Var target = tape.constant(Tensor::vector({0, 0}));
    std::vector<Var> hyps = {tape.constant(Tensor::vector({1, 0})),
                             tape.constant(Tensor::vector({0, 1})),
                             tape.constant(Tensor::vector({2, 0}))};
    WtaResult res = wta_loss(tape, hyps, target);
    CHECK(res.selection.winner_index == 0);  // tie between 0 and 1
    double min_d = *std::min_element(res.selection.distances.begin(),
                                     res.selection.distances.end());
    CHECK(res.selection.distances[res.selection.winner_index] == min_d);
}

TEST_CASE("wta_loss routes gradients only to the winner") {
    Parameter a(Tensor::vector({0.0, 0.0}));
    Parameter b(Tensor::vector({1.0, 1.0}));
    Tape tape;
    std::vector<Var> hyps = {tape.leaf(a), tape.leaf(b)};
    WtaResult res = wta_loss(tape, hyps, tape.constant(Tensor::vector({0.9, 0.9})));
    tape.backward(res.loss);
    CHECK(a.gradient[0] == 0.0);
    CHECK(a.gradient[1] == 0.0);
    CHECK(b.gradient[0] != 0.0);
}

TEST_CASE("mixture_wta_loss values") {
    Tape tape;
    Var phi = tape.softmax(tape.constant(Tensor::vector({0, 0})));  // (0.5, 0.5)

    // Winner distance 0 -> loss 0 regardless of phi.
    std::vector<Var> exact = {tape.constant(Tensor::vector({0.9, 0.9})),
                              tape.constant(Tensor::vector({5, 5}))};
    WtaResult zero = mixture_wta_loss(tape, exact, phi, tape.constant(Tensor::vector({0.9, 0.9})));
    CHECK(tape.value(zero.loss)[0] == 0.0);

    // Coefficient mass concentrated on the winner -> log term vanishes.
    Var hot = tape.constant(Tensor::vector({1.0 - 1e-9, 1e-9}));
    std::vector<Var> hyps = {tape.constant(Tensor::vector({0.8, 0.9})),
                             tape.constant(Tensor::vector({5, 5}))};
    WtaResult onehot = mixture_wta_loss(tape, hyps, hot, tape.constant(Tensor::vector({0.9, 0.9})));
    CHECK(onehot.selection.winner_index == 0);
    CHECK(tape.value(onehot.loss)[0] == doctest::Approx(0.0));

    // phi=(0.5,0.5), winner distance 0.02: loss = -log(0.5) * 0.02.
    std::vector<Var> pair = {tape.constant(Tensor::vector({1.0, 1.0})),
                             tape.constant(Tensor::vector({5, 5}))};
    WtaResult mid = mixture_wta_loss(tape, pair, phi, tape.constant(Tensor::vector({0.9, 0.9})));
    CHECK(tape.value(mid.loss)[0] == doctest::Approx(-std::log(0.5) * 0.02).epsilon(1e-9));
}

TEST_CASE("mixture_wta_loss rejects unnormalized coefficients") {
    Tape tape;
    std::vector<Var> hyps = {tape.constant(Tensor::vector({0, 0}))};
    Var bad = tape.constant(Tensor::vector({0.7}));
    CHECK_THROWS_AS(mixture_wta_loss(tape, hyps, bad, tape.constant(Tensor::vector({0, 0}))),
                    ValueError);
}

TEST_CASE("mixture_wta_loss reaches both winner and coefficients") {
    Rng rng(3);
    Mlp gate = make_mlp(1, {{2, Activation::Identity, false}}, rng, 1.0);
    Parameter h(Tensor::vector({1.0, 1.0}));
    Tape tape;
    Var phi = tape.softmax(gate.forward(tape, tape.constant(Tensor::vector({1.0}))));
    std::vector<Var> hyps = {tape.leaf(h), tape.constant(Tensor::vector({9, 9}))};
    WtaResult res = mixture_wta_loss(tape, hyps, phi, tape.constant(Tensor::vector({0, 0})));
    tape.backward(res.loss);
    CHECK(h.gradient[0] != 0.0);
    bool gate_touched = false;
    for (Parameter* p : gate.parameters())
        for (double g : p->gradient.data)
            if (g != 0.0) gate_touched = true;
    CHECK(gate_touched);
}

TEST_CASE("swta_loss with full subset equals vanilla wta over the enumeration") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng init(seed);
        MHDropoutNetwork net = make_242(init);
        net.subset_size = net.subnetwork_count();
        Tensor x = Tensor::vector({0.3, -0.1});
        Tensor y = Tensor::vector({0.6, 0.2});

        Rng r1(seed + 1000);
        Tape t1;
        WtaResult swta = swta_loss(net, t1, t1.constant(x), t1.constant(y), r1);
        double swta_val = t1.value(swta.loss)[0];

        Tape t2;
        std::vector<Var> hyps = hypotheses(net, t2, t2.constant(x), enumerate_masks(net));
        WtaResult wta = wta_loss(t2, hyps, t2.constant(y));
        CHECK(swta_val == t2.value(wta.loss)[0]);
        CHECK(swta.selection.winner_index == wta.selection.winner_index);
    }
}

TEST_CASE("swta_loss with T=1 reduces to the single subnetwork squared error") {
    Rng init(5);
    MHDropoutNetwork net = make_242(init);
    net.subset_size = 1;
    Tensor x = Tensor::vector({0.2, 0.4});
    Tensor y = Tensor::vector({0.5, 0.5});
    Rng r1(77), r2(77);
    Tape tape;
    WtaResult res = swta_loss(net, tape, tape.constant(x), tape.constant(y), r1);
    DropoutMask mask = sample_masks(net, 1, r2)[0];
    Tensor out = net.forward_masked_value(x, mask);
    double expect = (out[0] - y[0]) * (out[0] - y[0]) + (out[1] - y[1]) * (out[1] - y[1]);
    CHECK(tape.value(res.loss)[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(res.selection.winner_index == 0);
}

TEST_CASE("swta_loss winner matches replayed brute-force argmin") {
    Rng init(8);
    MHDropoutNetwork net = make_242(init);
    net.subset_size = 4;
    Tensor x = Tensor::vector({-0.4, 0.9});
    Tensor y = Tensor::vector({0.1, 0.8});
    Rng r1(31), r2(31);
    Tape tape;
    WtaResult res = swta_loss(net, tape, tape.constant(x), tape.constant(y), r1);
    auto masks = sample_masks(net, 4, r2);
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t t = 0; t < masks.size(); ++t) {
        Tensor out = net.forward_masked_value(x, masks[t]);
        double d = (out[0] - y[0]) * (out[0] - y[0]) + (out[1] - y[1]) * (out[1] - y[1]);
        if (best_d < 0.0 || d < best_d) {
            best_d = d;
            best = t;
        }
    }
    CHECK(res.selection.winner_index == best);
    CHECK(tape.value(res.loss)[0] == doctest::Approx(best_d).epsilon(1e-12));
}

TEST_CASE("swta_loss gives exactly zero gradient to parameters used only by losers") {
    // Two independent predictor parameters fed through wta_loss directly;
    // the loser's gradient buffer stays exactly zero.
    Parameter winner(Tensor::vector({0.5, 0.5}));
    Parameter loser(Tensor::vector({5.0, 5.0}));
    Tape tape;
    WtaResult res = wta_loss(tape, {tape.leaf(winner), tape.leaf(loser)},
                             tape.constant(Tensor::vector({0.4, 0.4})));
    tape.backward(res.loss);
    CHECK(res.selection.winner_index == 0);
    CHECK(loser.gradient[0] == 0.0);
    CHECK(loser.gradient[1] == 0.0);
}

TEST_CASE("mom_loss hand example") {
    // M=2, T=2, distances ((0.5,0.1),(0.3,0.9)), phi=(0.25,0.75), lambda=0.1:
    // winner (0,1), loss = -0.1 log(0.25) + 0.1.
    Tape tape;
    Var target = tape.constant(Tensor::vector({0.0}));
    auto hyp = [&](double d) { return tape.constant(Tensor::vector({std::sqrt(d)})); };
    std::vector<std::vector<Var>> grid = {{hyp(0.5), hyp(0.1)}, {hyp(0.3), hyp(0.9)}};
    Var phi = tape.constant(Tensor::vector({0.25, 0.75}));
    MomLossResult res = mom_loss(tape, grid, phi, target, 0.1);
    CHECK(res.winner.component == 0);
    CHECK(res.winner.hypothesis == 1);
    CHECK(tape.value(res.loss)[0] ==
          doctest::Approx(-0.1 * std::log(0.25) + 0.1).epsilon(1e-9));
}

TEST_CASE("mom_loss trivial and limiting cases") {
    Tape tape;
    Var target = tape.constant(Tensor::vector({0.7}));

    // Winner distance 0 with phi at 1 -> loss 0.
    std::vector<std::vector<Var>> grid = {{tape.constant(Tensor::vector({0.7}))}};
    Var hot = tape.constant(Tensor::vector({1.0}));
    MomLossResult zero = mom_loss(tape, grid, hot, target, 0.1);
    CHECK(tape.value(zero.loss)[0] == doctest::Approx(0.0));

    // Tiny lambda approaches the flattened global WTA loss.
    std::vector<std::vector<Var>> grid2 = {
        {tape.constant(Tensor::vector({0.0})), tape.constant(Tensor::vector({0.6}))},
        {tape.constant(Tensor::vector({2.0})), tape.constant(Tensor::vector({0.1}))}};
    Var phi = tape.constant(Tensor::vector({0.5, 0.5}));
    MomLossResult tiny = mom_loss(tape, grid2, phi, target, 1e-12);
    CHECK(tiny.winner.component == 0);
    CHECK(tiny.winner.hypothesis == 1);
    CHECK(tape.value(tiny.loss)[0] == doctest::Approx(0.01).epsilon(1e-6));

    CHECK_THROWS_AS(mom_loss(tape, grid2, phi, target, 0.0), ValueError);
    CHECK_THROWS_AS(mom_loss(tape, grid2, phi, target, -1.0), ValueError);
}

TEST_CASE("mom_loss global winner achieves the grid minimum, ties to smallest (m, t)") {
    Tape tape;
    Var target = tape.constant(Tensor::vector({0.0}));
    // Equal distances everywhere: winner must be (0, 0).
    std::vector<std::vector<Var>> grid = {
        {tape.constant(Tensor::vector({1.0})), tape.constant(Tensor::vector({-1.0}))},
        {tape.constant(Tensor::vector({1.0})), tape.constant(Tensor::vector({1.0}))}};
    Var phi = tape.constant(Tensor::vector({0.5, 0.5}));
    MomLossResult res = mom_loss(tape, grid, phi, target, 0.1);
    CHECK(res.winner.component == 0);
    CHECK(res.winner.hypothesis == 0);
    CHECK(res.winner.distance == doctest::Approx(1.0));
}

TEST_CASE("mom_loss routes gradients to the winning hypothesis and phi only") {
    Parameter win(Tensor::vector({0.1}));
    Parameter lose(Tensor::vector({9.0}));
    Rng rng(4);
    Mlp gate = make_mlp(1, {{2, Activation::Identity, false}}, rng, 1.0);
    Tape tape;
    Var phi = tape.softmax(gate.forward(tape, tape.constant(Tensor::vector({1.0}))));
    std::vector<std::vector<Var>> grid = {{tape.leaf(win)}, {tape.leaf(lose)}};
    MomLossResult res = mom_loss(tape, grid, phi, tape.constant(Tensor::vector({0.0})), 0.1);
    tape.backward(res.loss);
    CHECK(res.winner.component == 0);
    CHECK(win.gradient[0] != 0.0);
    CHECK(lose.gradient[0] == 0.0);
}

TEST_CASE("winner selection is invariant under positive scaling of all hypotheses' distances") {
    // Scaling every hypothesis (and the target) by c > 0 scales all distances
    // by c^2 and must not change the argmin.
    Tape tape;
    std::vector<double> vals = {0.9, 0.2, 0.5, 0.7};
    for (double c : {0.5, 1.0, 3.0, 10.0}) {
        std::vector<Var> hyps;
        for (double v : vals) hyps.push_back(tape.constant(Tensor::vector({c * v})));
        WtaResult res = wta_loss(tape, hyps, tape.constant(Tensor::vector({0.0})));
        CHECK(res.selection.winner_index == 1);
    }
}
