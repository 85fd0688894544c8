#include "celltop/network.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "celltop/entmax.hpp"
#include "celltop/operators.hpp"

namespace celltop {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string layer_name(const std::string& stem, int layer, const std::string& leaf) {
  return stem + ".l" + std::to_string(layer + 1) + "." + leaf;
}

}  // namespace

Value downlift(Value x_edges_out, Value x_nodes_int, const Skeleton& g, const LiftParams& p) {
  require(g.n_edges() == x_edges_out.val().rows, "downlift: edge count mismatch");
  require(g.n_vertices == x_nodes_int.val().rows, "downlift: node count mismatch");
  Value h = add_row_bias(matmul(x_edges_out, p.phi_w), p.phi_b);
  Value pooled = spmm(coboundary_incidence(g), h);
  Value down = add_row_bias(matmul(pooled, p.beta_w), p.beta_b);
  return concat_cols(x_nodes_int, down);
}

DcmModel::DcmModel(ModelConfig cfg, Rng& rng) : cfg_(cfg) {
  require(cfg.f_in > 0 && cfg.n_classes > 0, "DcmModel: f_in and n_classes required");
  require(cfg.hidden > 0 && cfg.k_max >= 3, "DcmModel: hidden > 0 and k_max >= 3 required");
  require(cfg.gcn_layers >= 1 && cfg.cccn_layers >= 1, "DcmModel: need >= 1 MP layer");
  require(cfg.dropout >= 0.0 && cfg.dropout < 1.0, "DcmModel: dropout in [0, 1)");
  int h = cfg.hidden;

  params_.create("enc.w", cfg.f_in, h, rng);
  params_.create_zeros("enc.b", 1, h);

  // nu_0 takes the raw features directly so the inference branch shares no
  // parameters with the task branch.
  for (int l = 0; l < 3; ++l) {
    params_.create(layer_name("aux0", l, "w"), l == 0 ? cfg.f_in : h, h, rng);
    if (!cfg.graph_conditioned) params_.create_zeros(layer_name("aux0", l, "b"), 1, h);
  }
  params_.create_scalar("alpha_edge.raw", 0.0);
  params_.create_scalar("alpha_poly.raw", 0.0);

  for (int l = 0; l < cfg.gcn_layers; ++l)
    params_.create(layer_name("gcn", l, "w"), h, h, rng);

  for (const char* stem : {"nu1", "uplift", "down"}) {
    std::string s(stem);
    params_.create(s + ".phi.w", h, h, rng);
    params_.create_zeros(s + ".phi.b", 1, h);
    params_.create(s + ".beta.w", h, h, rng);
    params_.create_zeros(s + ".beta.b", 1, h);
  }

  for (int l = 0; l < cfg.cccn_layers; ++l) {
    params_.create(layer_name("cccn", l, "wu"), h, h, rng);
    params_.create(layer_name("cccn", l, "wd"), h, h, rng);
    params_.create(layer_name("cccn", l, "w"), h, h, rng);
  }

  params_.create("head.w", 2 * h, cfg.n_classes, rng);
  params_.create_zeros("head.b", 1, cfg.n_classes);
}

bool DcmModel::is_aux_param(const std::string& name) {
  return name.rfind("aux0.", 0) == 0 || name.rfind("nu1.", 0) == 0 ||
         name.rfind("alpha_", 0) == 0;
}

ForwardResult DcmModel::forward(Tape& tape, const Tensor& x_raw,
                                const std::optional<Skeleton>& g_in, bool train_mode,
                                Rng& rng) {
  require(x_raw.cols == cfg_.f_in, "forward: feature width mismatch");
  require(x_raw.rows >= 2, "forward: need at least 2 nodes");
  require(x_raw.all_finite(), "forward: non-finite input features");

  auto p = [&](const std::string& name) { return tape.leaf(params_.at(name).value, name); };
  auto maybe_drop = [&](Value v) {
    return (train_mode && cfg_.dropout > 0.0) ? dropout(v, cfg_.dropout, rng) : v;
  };
  auto lift_params = [&](const std::string& stem) {
    return LiftParams{p(stem + ".phi.w"), p(stem + ".phi.b"),
                      p(stem + ".beta.w"), p(stem + ".beta.b")};
  };

  Value x = tape.constant(x_raw);

  // inference branch: nu_0 -> similarity -> edge sampling
  AuxEncoderValues aux_p;
  aux_p.graph_conditioned = cfg_.graph_conditioned;
  for (int l = 0; l < 3; ++l) {
    aux_p.w[l] = p(layer_name("aux0", l, "w"));
    if (!cfg_.graph_conditioned) aux_p.b[l] = p(layer_name("aux0", l, "b"));
  }
  Value aux = encode_aux(x, g_in, aux_p);
  Value alpha_e = alpha_from_raw(p("alpha_edge.raw"));

  ForwardResult out;
  out.skeleton = sample_skeleton(similarity_matrix(aux), alpha_e);
  const Skeleton& skel = out.skeleton.sampled.skeleton;

  // task branch: encoder -> node MP over the sampled skeleton
  Value h0 = maybe_drop(relu(add_row_bias(matmul(x, p("enc.w")), p("enc.b"))));
  std::vector<Value> gcn_w;
  for (int l = 0; l < cfg_.gcn_layers; ++l) gcn_w.push_back(p(layer_name("gcn", l, "w")));
  Value h_int = maybe_drop(node_mp(h0, skel, gcn_w));

  // polygon inference over the candidate chordless cycles
  out.candidates = enumerate_induced_cycles(skel, cfg_.k_max);
  Value aux_edges = uplift(aux, skel, lift_params("nu1"));
  Value alpha_p = alpha_from_raw(p("alpha_poly.raw"));
  out.polygons =
      sample_polygons(aux_edges, skel, out.candidates, alpha_p, cfg_.all_polygons);
  out.complex = lift(skel, out.candidates, out.polygons.sampled.selected);

  // task branch continued: uplift -> edge MP -> downlift -> head
  Value x_edges = uplift(h_int, skel, lift_params("uplift"));
  std::vector<CccnLayerValues> cccn;
  for (int l = 0; l < cfg_.cccn_layers; ++l)
    cccn.push_back({p(layer_name("cccn", l, "wu")), p(layer_name("cccn", l, "wd")),
                    p(layer_name("cccn", l, "w"))});
  Value x_edges_out = maybe_drop(edge_mp(x_edges, out.complex, cccn));

  Value x_out = downlift(x_edges_out, h_int, skel, lift_params("down"));
  out.logits = add_row_bias(matmul(x_out, p("head.w")), p("head.b"));
  return out;
}

void DcmModel::save(const std::string& path_stem) const {
  nlohmann::json manifest;
  manifest["format"] = "celltop-params-v1";
  manifest["dtype"] = "float64-le";
  manifest["config"] = {{"f_in", cfg_.f_in},
                        {"n_classes", cfg_.n_classes},
                        {"hidden", cfg_.hidden},
                        {"k_max", cfg_.k_max},
                        {"gcn_layers", cfg_.gcn_layers},
                        {"cccn_layers", cfg_.cccn_layers},
                        {"dropout", cfg_.dropout},
                        {"all_polygons", cfg_.all_polygons},
                        {"graph_conditioned", cfg_.graph_conditioned}};
  nlohmann::json tensors = nlohmann::json::array();

  std::ofstream bin(path_stem + ".bin", std::ios::binary);
  require(bin.good(), "save: cannot open " + path_stem + ".bin");
  size_t offset = 0;
  for (const std::string& name : params_.names()) {
    const Tensor& t = params_.at(name).value;
    tensors.push_back({{"name", name}, {"rows", t.rows}, {"cols", t.cols}, {"offset", offset}});
    bin.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
    offset += t.size();
  }
  manifest["tensors"] = std::move(tensors);
  require(bin.good(), "save: write failed for " + path_stem + ".bin");
  bin.close();

  std::ofstream js(path_stem + ".json");
  require(js.good(), "save: cannot open " + path_stem + ".json");
  js << manifest.dump(2) << "\n";
}

DcmModel DcmModel::load(const std::string& path_stem) {
  std::ifstream js(path_stem + ".json");
  require(js.good(), "load: cannot open " + path_stem + ".json");
  nlohmann::json manifest = nlohmann::json::parse(js);
  require(manifest.value("format", "") == "celltop-params-v1",
          "load: unrecognized manifest format in " + path_stem + ".json");

  const auto& c = manifest.at("config");
  ModelConfig cfg;
  cfg.f_in = c.at("f_in");
  cfg.n_classes = c.at("n_classes");
  cfg.hidden = c.at("hidden");
  cfg.k_max = c.at("k_max");
  cfg.gcn_layers = c.at("gcn_layers");
  cfg.cccn_layers = c.at("cccn_layers");
  cfg.dropout = c.at("dropout");
  cfg.all_polygons = c.at("all_polygons");
  cfg.graph_conditioned = c.at("graph_conditioned");

  DcmModel model(cfg);
  std::ifstream bin(path_stem + ".bin", std::ios::binary);
  require(bin.good(), "load: cannot open " + path_stem + ".bin");
  for (const auto& entry : manifest.at("tensors")) {
    std::string name = entry.at("name");
    int rows = entry.at("rows"), cols = entry.at("cols");
    Param& prm = model.params_.create_zeros(name, rows, cols);
    bin.seekg(static_cast<std::streamoff>(entry.at("offset").get<size_t>() * sizeof(double)));
    bin.read(reinterpret_cast<char*>(prm.value.data.data()),
             static_cast<std::streamsize>(prm.value.size() * sizeof(double)));
    require(bin.good(), "load: truncated tensor " + name + " in " + path_stem + ".bin");
    require(prm.value.all_finite(), "load: non-finite values in tensor " + name);
  }
  return model;
}

}  // namespace celltop
