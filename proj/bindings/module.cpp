#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mhd/checkpoint.hpp"
#include "mhd/datasets.hpp"
#include "mhd/experiments.hpp"

namespace py = pybind11;
using namespace mhd;

namespace {

Tensor to_tensor(const std::vector<double>& v) { return Tensor::vector(v); }

std::vector<std::vector<double>> to_lists(const std::vector<Tensor>& ts) {
    std::vector<std::vector<double>> out;
    out.reserve(ts.size());
    for (const Tensor& t : ts) out.push_back(t.data);
    return out;
}

// A dropout-based multiple-hypothesis network with an owned RNG stream so
// python callers get reproducible training without managing generator state.
class MultiHypothesisNetwork {
  public:
    MultiHypothesisNetwork(std::size_t input_dim, std::size_t hidden_units,
                           std::size_t output_dim, double keep_prob, std::size_t subset_size,
                           std::uint64_t seed)
        : rng_(seed) {
        net_.net = make_mlp(input_dim,
                            {{hidden_units, Activation::Sigmoid, true},
                             {output_dim, Activation::Sigmoid, false}},
                            rng_, 1.0);
        net_.keep_prob = keep_prob;
        net_.subset_size = subset_size;
    }

    std::size_t parameter_count() const { return net_.net.parameter_count(); }
    std::size_t subnetwork_count() const { return net_.subnetwork_count(); }

    std::vector<double> forward(const std::vector<double>& x) const {
        return net_.net.forward_value(to_tensor(x)).data;
    }

    std::vector<std::vector<double>> enumerate_hypotheses(const std::vector<double>& x) const {
        return to_lists(hypotheses_values(net_, to_tensor(x), enumerate_masks(net_)));
    }

    std::vector<std::vector<double>> sample_hypotheses(const std::vector<double>& x,
                                                       std::size_t count) {
        return to_lists(hypotheses_values(net_, to_tensor(x), sample_masks(net_, count, rng_)));
    }

    std::vector<double> mean(const std::vector<double>& x) const {
        return predictive_mean(hypotheses_values(net_, to_tensor(x), enumerate_masks(net_))).data;
    }

    std::vector<double> variance(const std::vector<double>& x) const {
        return predictive_variance(hypotheses_values(net_, to_tensor(x), enumerate_masks(net_)))
            .data;
    }

    std::vector<double> mc_inference(const std::vector<double>& x) const {
        return mc_dropout_inference(net_, to_tensor(x)).data;
    }

    double train_swta_step(const std::vector<double>& x, const std::vector<double>& y,
                           double learning_rate) {
        Tape tape;
        WtaResult res =
            swta_loss(net_, tape, tape.constant(to_tensor(x)), tape.constant(to_tensor(y)), rng_);
        double loss = tape.value(res.loss)[0];
        tape.backward(res.loss);
        sgd_step(net_.parameters(), learning_rate);
        return loss;
    }

  private:
    MHDropoutNetwork net_;
    Rng rng_;
};

class MixtureModel {
  public:
    MixtureModel(std::size_t input_dim, std::size_t output_dim, std::size_t components,
                 std::size_t subset_size, double lambda, std::uint64_t seed)
        : rng_(seed) {
        MoMConfig cfg;
        cfg.input_dim = input_dim;
        cfg.output_dim = output_dim;
        cfg.components = components;
        cfg.encoder_hidden = {{4, Activation::Tanh, false}};
        cfg.gate_hidden = {{4, Activation::Tanh, false}};
        cfg.subset_size = subset_size;
        cfg.lambda = lambda;
        model_ = make_mom(cfg, rng_);
        model_.variance_samples = 16;
        model_.predictive_mean_inference = true;
    }

    explicit MixtureModel(const std::string& checkpoint_path) : rng_(0) {
        model_ = load_mom(checkpoint_path);
    }

    std::size_t components() const { return model_.components(); }

    double train_step(const std::vector<double>& x, const std::vector<double>& y,
                      double learning_rate) {
        return mhd::train_step(model_, to_tensor(x), to_tensor(y), learning_rate, rng_).loss;
    }

    std::vector<double> coefficients(const std::vector<double>& x) const {
        return mixture_coefficients(model_, to_tensor(x)).data;
    }

    std::pair<std::vector<double>, std::vector<double>> component_moments(
        std::size_t m, const std::vector<double>& x) {
        ComponentStats stats = component_stats(model_, m, to_tensor(x), rng_);
        return {stats.mean.data, stats.variance.data};
    }

    std::vector<std::pair<std::size_t, std::vector<double>>> sample(const std::vector<double>& x,
                                                                    std::size_t count) {
        std::vector<std::pair<std::size_t, std::vector<double>>> out;
        for (MoMSample& s : infer(model_, to_tensor(x), rng_, count))
            out.emplace_back(s.component, s.value.data);
        return out;
    }

    void save(const std::string& path) const { save_mom(model_, path); }

  private:
    MoMModel model_;
    Rng rng_;
};

class QuantizedAutoencoder {
  public:
    QuantizedAutoencoder(std::size_t input_dim, std::size_t latent_dim,
                         std::size_t primary_entries, std::size_t secondary_entries,
                         std::size_t subset_size, std::uint64_t seed)
        : rng_(seed) {
        MHVQConfig cfg;
        cfg.input_dim = input_dim;
        cfg.latent_dim = latent_dim;
        cfg.primary_entries = primary_entries;
        cfg.secondary_entries = secondary_entries;
        cfg.encoder_hidden = {{8, Activation::Tanh, false}};
        cfg.decoder_hidden = {{8, Activation::Tanh, false}};
        cfg.subset_size = subset_size;
        model_ = make_mhvq(cfg, rng_);
    }

    explicit QuantizedAutoencoder(const std::string& checkpoint_path) : rng_(0) {
        model_ = load_mhvq(checkpoint_path, &posterior_);
    }

    double train_step(const std::vector<double>& x, double learning_rate) {
        return mhvq_train_step(model_, to_tensor(x), learning_rate, rng_).reconstruction;
    }

    double baseline_train_step(const std::vector<double>& x, double learning_rate) {
        return vq_train_step(model_, to_tensor(x), learning_rate).reconstruction;
    }

    std::pair<std::size_t, std::size_t> tokens(const std::vector<double>& x) const {
        TokenPair t = encode_tokens(model_, to_tensor(x));
        return {t.primary, t.secondary};
    }

    void fit_posterior(const std::vector<std::vector<double>>& data) {
        std::vector<Tensor> tensors;
        tensors.reserve(data.size());
        for (const auto& row : data) tensors.push_back(to_tensor(row));
        posterior_ = fit_categorical_posterior(model_, tensors);
    }

    std::vector<std::vector<double>> sample(std::size_t count) {
        return to_lists(generate(model_, posterior_, rng_, count));
    }

    void save(const std::string& path) const { save_mhvq(model_, posterior_, path); }

  private:
    MHVQModel model_;
    PosteriorTable posterior_;
    Rng rng_;
};

}  // namespace

PYBIND11_MODULE(mhdnet, m) {
    m.doc() = "Multiple-hypothesis dropout networks: SWTA training, mixtures of "
              "multiple-output functions, and a quantized autoencoder with learned spread";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DimensionError>(m, "DimensionError");

    py::class_<MultiHypothesisNetwork>(m, "MultiHypothesisNetwork")
        .def(py::init<std::size_t, std::size_t, std::size_t, double, std::size_t,
                      std::uint64_t>(),
             py::arg("input_dim"), py::arg("hidden_units"), py::arg("output_dim"),
             py::arg("keep_prob") = 0.5, py::arg("subset_size") = 4, py::arg("seed") = 0)
        .def("parameter_count", &MultiHypothesisNetwork::parameter_count)
        .def("subnetwork_count", &MultiHypothesisNetwork::subnetwork_count)
        .def("forward", &MultiHypothesisNetwork::forward, py::arg("x"))
        .def("enumerate_hypotheses", &MultiHypothesisNetwork::enumerate_hypotheses, py::arg("x"))
        .def("sample_hypotheses", &MultiHypothesisNetwork::sample_hypotheses, py::arg("x"),
             py::arg("count"))
        .def("mean", &MultiHypothesisNetwork::mean, py::arg("x"))
        .def("variance", &MultiHypothesisNetwork::variance, py::arg("x"))
        .def("mc_inference", &MultiHypothesisNetwork::mc_inference, py::arg("x"))
        .def("train_swta_step", &MultiHypothesisNetwork::train_swta_step, py::arg("x"),
             py::arg("y"), py::arg("learning_rate"));

    py::class_<MixtureModel>(m, "MixtureModel")
        .def(py::init<std::size_t, std::size_t, std::size_t, std::size_t, double,
                      std::uint64_t>(),
             py::arg("input_dim"), py::arg("output_dim"), py::arg("components"),
             py::arg("subset_size") = 4, py::arg("lambda_") = 0.1, py::arg("seed") = 0)
        .def(py::init<const std::string&>(), py::arg("checkpoint_path"))
        .def("components", &MixtureModel::components)
        .def("train_step", &MixtureModel::train_step, py::arg("x"), py::arg("y"),
             py::arg("learning_rate"))
        .def("coefficients", &MixtureModel::coefficients, py::arg("x"))
        .def("component_moments", &MixtureModel::component_moments, py::arg("m"), py::arg("x"))
        .def("sample", &MixtureModel::sample, py::arg("x"), py::arg("count"))
        .def("save", &MixtureModel::save, py::arg("path"));

    py::class_<QuantizedAutoencoder>(m, "QuantizedAutoencoder")
        .def(py::init<std::size_t, std::size_t, std::size_t, std::size_t, std::size_t,
                      std::uint64_t>(),
             py::arg("input_dim"), py::arg("latent_dim"), py::arg("primary_entries"),
             py::arg("secondary_entries") = 1, py::arg("subset_size") = 4, py::arg("seed") = 0)
        .def(py::init<const std::string&>(), py::arg("checkpoint_path"))
        .def("train_step", &QuantizedAutoencoder::train_step, py::arg("x"),
             py::arg("learning_rate"))
        .def("baseline_train_step", &QuantizedAutoencoder::baseline_train_step, py::arg("x"),
             py::arg("learning_rate"))
        .def("tokens", &QuantizedAutoencoder::tokens, py::arg("x"))
        .def("fit_posterior", &QuantizedAutoencoder::fit_posterior, py::arg("data"))
        .def("sample", &QuantizedAutoencoder::sample, py::arg("count"))
        .def("save", &QuantizedAutoencoder::save, py::arg("path"));

    m.def(
        "standard_deviation_distance",
        [](const std::vector<std::vector<std::vector<double>>>& predicted,
           const std::vector<std::vector<std::vector<double>>>& targets) {
            std::vector<std::vector<Tensor>> p, t;
            for (const auto& trial : predicted) {
                std::vector<Tensor> set;
                for (const auto& row : trial) set.push_back(to_tensor(row));
                p.push_back(std::move(set));
            }
            for (const auto& trial : targets) {
                std::vector<Tensor> set;
                for (const auto& row : trial) set.push_back(to_tensor(row));
                t.push_back(std::move(set));
            }
            return sdd(p, t);
        },
        py::arg("predicted"), py::arg("targets"),
        "Mean L2 distance between elementwise standard deviations, averaged over trials");

    m.def("sine_branches", &sine_branches, py::arg("x"), py::arg("grid") = 4096,
          "All y in (0,1) with y + 0.3 sin(2 pi y) == x");
    m.def("subset_size_from_ratio", &subset_size_from_ratio, py::arg("ratio"),
          py::arg("total_subnetworks"));
}
