#include "core/network.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

namespace grasplab::learn {

const char* modality_name(Modality m) {
  switch (m) {
    case Modality::fusion: return "fusion";
    case Modality::vision: return "vision";
    case Modality::vision_pose: return "vision_pose";
    case Modality::depth: return "depth";
    case Modality::tactile_both: return "tactile_both";
    case Modality::tactile_left: return "tactile_left";
    case Modality::tactile_right: return "tactile_right";
  }
  return "unknown";
}

Modality modality_from_name(std::string_view name) {
  for (Modality m : kAllModalities)
    if (name == modality_name(m)) return m;
  throw ConfigError("unknown modality: " + std::string(name));
}

ModalityUses modality_uses(Modality m) {
  ModalityUses u;
  switch (m) {
    case Modality::fusion:
      u.rgb = u.tactile_l = u.tactile_r = true;
      break;
    case Modality::vision:
      u.rgb = true;
      break;
    case Modality::vision_pose:
      u.rgb = u.pose = true;
      break;
    case Modality::depth:
      u.depth = true;
      break;
    case Modality::tactile_both:
      u.tactile_l = u.tactile_r = true;
      break;
    case Modality::tactile_left:
      u.tactile_l = true;
      break;
    case Modality::tactile_right:
      u.tactile_r = true;
      break;
  }
  return u;
}

int feature_width(Modality m) {
  ModalityUses u = modality_uses(m);
  int w = 0;
  if (u.rgb) w += 2 * kTowerFeat;
  if (u.tactile_l) w += kTowerFeat;
  if (u.tactile_r) w += kTowerFeat;
  if (u.depth) w += kTowerFeat;
  if (u.pose) w += kPoseHidden;
  return w;
}

namespace {

constexpr char kMagic[8] = {'G', 'R', 'S', 'P', 'N', 'E', 'T', '1'};

nlohmann::ordered_json stats_to_json(const NormStats& s) {
  auto ch = [](const ChannelStats& c) {
    return nlohmann::ordered_json{{"mean", c.mean}, {"std", c.stdev}};
  };
  return {{"rgb", ch(s.rgb)},
          {"tdiff", ch(s.tdiff)},
          {"depth", ch(s.depth)},
          {"theta_mean", s.theta_mean},
          {"theta_std", s.theta_std}};
}

NormStats stats_from_json(const nlohmann::json& j) {
  NormStats s;
  auto ch = [](const nlohmann::json& c, ChannelStats& out) {
    for (int i = 0; i < 3; ++i) {
      out.mean[i] = c.at("mean").at(i).get<double>();
      out.stdev[i] = c.at("std").at(i).get<double>();
    }
  };
  ch(j.at("rgb"), s.rgb);
  ch(j.at("tdiff"), s.tdiff);
  ch(j.at("depth"), s.depth);
  for (int i = 0; i < 5; ++i) {
    s.theta_mean[i] = j.at("theta_mean").at(i).get<double>();
    s.theta_std[i] = j.at("theta_std").at(i).get<double>();
  }
  return s;
}

nlohmann::ordered_json config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs}, {"lr", c.lr},       {"lr_late", c.lr_late}, {"batch", c.batch},
          {"beta1", c.beta1},   {"beta2", c.beta2}, {"eps", c.eps},         {"seed", c.seed},
          {"cam_px", c.cam_px}, {"tac_w", c.tac_w}, {"tac_h", c.tac_h}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.lr = j.at("lr").get<double>();
  c.lr_late = j.at("lr_late").get<double>();
  c.batch = j.at("batch").get<int>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.eps = j.at("eps").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  c.cam_px = j.at("cam_px").get<int>();
  c.tac_w = j.at("tac_w").get<int>();
  c.tac_h = j.at("tac_h").get<int>();
  return c;
}

void put_u32le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

}  // namespace

void save_model(const Model& m, const std::string& path) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["modality"] = modality_name(m.modality);
  j["seed"] = m.seed;
  j["spec"] = {{"tower_channels", {kTowerC1, kTowerC2, kTowerC3}},
               {"kernel", 3},
               {"head_hidden", kHeadHidden},
               {"pose_hidden", kPoseHidden},
               {"feature_width", feature_width(m.modality)}};
  j["train_config"] = config_to_json(m.config);
  j["stats"] = stats_to_json(m.stats);
  auto params = nlohmann::ordered_json::array();
  // visit_params takes a mutable model; shapes and values are not modified.
  Model& mut = const_cast<Model&>(m);
  visit_params(mut, [&](const std::string& name, Tensor& t) {
    params.push_back({{"name", name}, {"shape", t.shape}});
  });
  j["params"] = std::move(params);

  std::string bytes(kMagic, sizeof(kMagic));
  std::string header = j.dump();
  put_u32le(bytes, static_cast<uint32_t>(header.size()));
  bytes += header;
  visit_params(mut, [&](const std::string&, Tensor& t) {
    for (int64_t i = 0; i < t.numel(); ++i) {
      uint32_t u;
      std::memcpy(&u, &t[i], 4);
      put_u32le(bytes, u);
    }
  });

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing model file: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not a model checkpoint: " + path);
  auto u32at = [&](size_t off) {
    return static_cast<uint32_t>(static_cast<unsigned char>(bytes[off])) |
           static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + 1])) << 8 |
           static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + 2])) << 16 |
           static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + 3])) << 24;
  };
  size_t hlen = u32at(8);
  if (12 + hlen > bytes.size()) throw FormatError("truncated model header: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.substr(12, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad model header: " + std::string(e.what()));
  }
  try {
    if (j.at("format_version").get<int>() != 1) throw FormatError("unsupported model version");
    Model m = make_model<float>(modality_from_name(j.at("modality").get<std::string>()));
    m.seed = j.at("seed").get<uint64_t>();
    m.config = config_from_json(j.at("train_config"));
    m.stats = stats_from_json(j.at("stats"));
    size_t off = 12 + hlen;
    size_t idx = 0;
    const auto& plist = j.at("params");
    visit_params(m, [&](const std::string& name, Tensor& t) {
      if (idx >= plist.size() || plist.at(idx).at("name").get<std::string>() != name ||
          plist.at(idx).at("shape").get<std::vector<int>>() != t.shape)
        throw FormatError("model parameter list mismatch at " + name);
      ++idx;
      if (off + 4 * static_cast<size_t>(t.numel()) > bytes.size())
        throw FormatError("truncated model blob: " + path);
      for (int64_t i = 0; i < t.numel(); ++i) {
        uint32_t u = u32at(off);
        std::memcpy(&t[i], &u, 4);
        off += 4;
      }
    });
    if (idx != plist.size()) throw FormatError("model parameter list mismatch: extra entries");
    if (off != bytes.size()) throw FormatError("trailing bytes in model file: " + path);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad model header: " + std::string(e.what()));
  }
}

}  // namespace grasplab::learn
