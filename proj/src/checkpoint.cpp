#include "mhd/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace mhd {

namespace {

using nlohmann::json;

const char* act_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
    }
    return "identity";
}

Activation act_from_name(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    throw ValueError("checkpoint: unknown activation '" + name + "'");
}

json mlp_to_json(const Mlp& net) {
    json layers = json::array();
    for (const DenseLayer& l : net.layers) {
        layers.push_back({{"in", l.in_dim()},
                          {"units", l.out_dim()},
                          {"activation", act_name(l.act)},
                          {"maskable", l.maskable},
                          {"weights", l.weights.value.data},
                          {"bias", l.bias.value.data}});
    }
    return layers;
}

Mlp mlp_from_json(const json& layers) {
    Mlp net;
    int next_id = 0;
    for (const json& j : layers) {
        std::size_t in = j.at("in"), units = j.at("units");
        DenseLayer l;
        l.weights = Parameter(
            Tensor::matrix(units, in, j.at("weights").get<std::vector<double>>()), next_id++);
        l.bias = Parameter(Tensor::vector(j.at("bias").get<std::vector<double>>()), next_id++);
        if (l.bias.value.size() != units)
            throw ValueError("checkpoint: bias length does not match layer units");
        l.act = act_from_name(j.at("activation"));
        l.maskable = j.at("maskable");
        net.layers.push_back(std::move(l));
    }
    return net;
}

json head_to_json(const MHDropoutNetwork& head) {
    return {{"net", mlp_to_json(head.net)},
            {"keep_prob", head.keep_prob},
            {"subset_size", head.subset_size}};
}

MHDropoutNetwork head_from_json(const json& j) {
    MHDropoutNetwork head;
    head.net = mlp_from_json(j.at("net"));
    head.keep_prob = j.at("keep_prob");
    head.subset_size = j.at("subset_size");
    return head;
}

json codebook_to_json(const Codebook& cb) {
    json entries = json::array();
    for (const Parameter& p : cb.embeddings) entries.push_back(p.value.data);
    return entries;
}

Codebook codebook_from_json(const json& j) {
    Codebook cb;
    int k = 0;
    for (const json& e : j)
        cb.embeddings.emplace_back(Tensor::vector(e.get<std::vector<double>>()), k++);
    return cb;
}

json read_checkpoint(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path);
    if (!in) throw ValueError("checkpoint: cannot open " + path);
    json j = json::parse(in);
    if (j.at("format_version").get<int>() != kCheckpointVersion)
        throw ValueError("checkpoint: unsupported format version");
    if (j.at("kind").get<std::string>() != expected_kind)
        throw ValueError("checkpoint: expected kind '" + expected_kind + "', got '" +
                         j.at("kind").get<std::string>() + "'");
    return j;
}

void write_checkpoint(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValueError("checkpoint: cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace

void save_mom(const MoMModel& model, const std::string& path) {
    json encoders = json::array();
    for (const Mlp& e : model.encoders) encoders.push_back(mlp_to_json(e));
    json heads = json::array();
    for (const MHDropoutNetwork& h : model.heads) heads.push_back(head_to_json(h));
    json j = {{"format_version", kCheckpointVersion},
              {"kind", "mom"},
              {"lambda", model.lambda},
              {"predictive_mean_inference", model.predictive_mean_inference},
              {"variance_samples", model.variance_samples},
              {"encoders", encoders},
              {"heads", heads},
              {"gate", mlp_to_json(model.gate)}};
    write_checkpoint(j, path);
}

MoMModel load_mom(const std::string& path) {
    json j = read_checkpoint(path, "mom");
    MoMModel model;
    model.lambda = j.at("lambda");
    model.predictive_mean_inference = j.at("predictive_mean_inference");
    model.variance_samples = j.at("variance_samples");
    for (const json& e : j.at("encoders")) model.encoders.push_back(mlp_from_json(e));
    for (const json& h : j.at("heads")) model.heads.push_back(head_from_json(h));
    model.gate = mlp_from_json(j.at("gate"));
    return model;
}

namespace {

json mhvq_to_json(const MHVQModel& model) {
    return {{"format_version", kCheckpointVersion},
            {"kind", "mhvq"},
            {"beta", model.beta},
            {"latent_wta_weight", model.latent_wta_weight},
            {"latent_wta_enabled", model.latent_wta_enabled},
            {"encoder", mlp_to_json(model.encoder)},
            {"secondary_encoder", mlp_to_json(model.secondary_encoder)},
            {"decoder", mlp_to_json(model.decoder)},
            {"primary_codebook", codebook_to_json(model.primary)},
            {"secondary_codebook", codebook_to_json(model.secondary)},
            {"offset", head_to_json(model.offset)}};
}

}  // namespace

void save_mhvq(const MHVQModel& model, const std::string& path) {
    write_checkpoint(mhvq_to_json(model), path);
}

void save_mhvq(const MHVQModel& model, const PosteriorTable& posterior, const std::string& path) {
    json j = mhvq_to_json(model);
    json table = json::array();
    for (const auto& [pair, p] : posterior.probabilities)
        table.push_back({{"primary", pair.primary}, {"secondary", pair.secondary}, {"p", p}});
    j["posterior"] = table;
    write_checkpoint(j, path);
}

MHVQModel load_mhvq(const std::string& path, PosteriorTable* posterior) {
    json j = read_checkpoint(path, "mhvq");
    MHVQModel model;
    model.beta = j.at("beta");
    model.latent_wta_weight = j.at("latent_wta_weight");
    model.latent_wta_enabled = j.at("latent_wta_enabled");
    model.encoder = mlp_from_json(j.at("encoder"));
    model.secondary_encoder = mlp_from_json(j.at("secondary_encoder"));
    model.decoder = mlp_from_json(j.at("decoder"));
    model.primary = codebook_from_json(j.at("primary_codebook"));
    model.secondary = codebook_from_json(j.at("secondary_codebook"));
    model.offset = head_from_json(j.at("offset"));
    if (posterior && j.contains("posterior")) {
        posterior->probabilities.clear();
        for (const json& e : j.at("posterior"))
            posterior->probabilities[{e.at("primary"), e.at("secondary")}] = e.at("p");
    }
    return model;
}

}  // namespace mhd
