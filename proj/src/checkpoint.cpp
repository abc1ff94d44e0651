#include "relnet/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "relnet/error.hpp"

namespace relnet {

using nlohmann::json;

namespace {

json tensor_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()},
              {"data", std::vector<double>(m.flat().begin(), m.flat().end())}};
}

Matrix tensor_from(const json& j, const std::string& name) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) {
    throw InputError("tensor '" + name + "' has " + std::to_string(data.size()) +
                     " values for shape " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.flat().begin());
  return m;
}

json index_json(const ModelIndex& idx) {
  json pairs = json::array();
  for (const auto& p : idx.pairs) pairs.push_back({p.first, p.second});
  return json{{"entities", idx.entities}, {"pairs", pairs}};
}

ModelIndex index_from(const json& j) {
  ModelIndex idx;
  idx.entities = j.at("entities").get<std::vector<std::string>>();
  for (const auto& p : j.at("pairs")) {
    idx.pairs.push_back(EntityPair::make(p.at(0).get<std::string>(), p.at(1).get<std::string>()));
  }
  if (!std::is_sorted(idx.entities.begin(), idx.entities.end()) ||
      !std::is_sorted(idx.pairs.begin(), idx.pairs.end())) {
    throw InputError("checkpoint index is not sorted");
  }
  return idx;
}

template <typename Tensors>
json tensors_json(const Tensors& t) {
  json out = json::object();
  t.for_each([&](const char* name, const Matrix& m) { out[name] = tensor_json(m); });
  return out;
}

template <typename Tensors>
void tensors_from(const json& j, Tensors& t) {
  t.for_each([&](const char* name, Matrix& m) {
    if (!j.contains(name)) throw InputError(std::string("checkpoint lacks tensor '") + name + "'");
    m = tensor_from(j.at(name), name);
  });
}

}  // namespace

std::string checkpoint_json(const Checkpoint& ck) {
  json j;
  j["format"] = "relnet-checkpoint";
  j["version"] = kCheckpointVersion;
  j["manifest_hash"] = ck.manifest_hash;
  if (const auto* p = std::get_if<ModelParams>(&ck.model)) {
    const auto& c = p->config;
    j["model"] = "larn";
    j["config"] = {{"relations", c.relations},   {"word_dim", c.word_dim},
                   {"entity_dim", c.entity_dim}, {"months", c.months},
                   {"attention_dim", c.resolved_attention_dim()},
                   {"final_dim", c.final_dim},   {"dropout", c.dropout}};
    j["index"] = index_json(p->index);
    j["tensors"] = tensors_json(p->t);
  } else {
    const auto& r = std::get<RmnParams>(ck.model);
    const auto& c = r.config;
    j["model"] = "rmn";
    j["config"] = {{"relations", c.relations},   {"word_dim", c.word_dim},
                   {"entity_dim", c.entity_dim}, {"hidden_dim", c.hidden_dim},
                   {"recurrence", c.recurrence}, {"stopword_count", c.stopword_count}};
    j["index"] = index_json(r.index);
    j["stopwords"] = r.stopwords;
    j["tensors"] = tensors_json(r.t);
  }
  return j.dump() + "\n";
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint '" + path + "'");
  out << checkpoint_json(ck);
}

Checkpoint parse_checkpoint(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "relnet-checkpoint") throw InputError("not a relnet checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw InputError("unsupported checkpoint version " + j.at("version").dump());
    }
    Checkpoint ck;
    ck.manifest_hash = j.value("manifest_hash", "");
    const auto kind = j.at("model").get<std::string>();
    const auto& c = j.at("config");
    if (kind == "larn") {
      ModelConfig mc;
      mc.relations = c.at("relations");
      mc.word_dim = c.at("word_dim");
      mc.entity_dim = c.at("entity_dim");
      mc.months = c.at("months");
      mc.attention_dim = c.at("attention_dim");
      mc.final_dim = c.at("final_dim");
      mc.dropout = c.at("dropout");
      auto p = ModelParams::shaped(mc, index_from(j.at("index")));
      tensors_from(j.at("tensors"), p.t);
      p.validate();
      ck.model = std::move(p);
    } else if (kind == "rmn") {
      RmnConfig rc;
      rc.relations = c.at("relations");
      rc.word_dim = c.at("word_dim");
      rc.entity_dim = c.at("entity_dim");
      rc.hidden_dim = c.at("hidden_dim");
      rc.recurrence = c.at("recurrence");
      rc.stopword_count = c.at("stopword_count");
      auto p = RmnParams::shaped(rc, index_from(j.at("index")));
      p.stopwords = j.at("stopwords").get<std::vector<std::string>>();
      tensors_from(j.at("tensors"), p.t);
      p.validate();
      ck.model = std::move(p);
    } else {
      throw InputError("unknown model kind '" + kind + "'");
    }
    return ck;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed checkpoint: ") + e.what());
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("checkpoint '" + path + "' not found");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace relnet
