#include "xcheck/imagematch.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "xcheck/error.hpp"
#include "xcheck/textembed.hpp"

namespace xcheck {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidBundle, msg); }

void check_vector(const Vec& v, std::size_t dim, const std::string& what) {
  if (v.size() != dim) {
    bad(what + " has dim " + std::to_string(v.size()) + ", expected " + std::to_string(dim));
  }
  bool nonzero = false;
  for (float x : v) {
    if (!std::isfinite(x)) bad(what + " contains a non-finite value");
    nonzero = nonzero || x != 0.0f;
  }
  if (!nonzero) bad(what + " is all zeros");
}

// Lazily loaded float32 sidecar.
class Sidecar {
 public:
  Sidecar(const json& doc, fs::path base) {
    if (doc.contains("sidecar") && doc["sidecar"].is_string()) {
      path_ = base / doc["sidecar"].get<std::string>();
    }
  }

  std::vector<Vec> rows(const json& ref, const std::string& what) {
    if (path_.empty()) bad(what + " references a sidecar but none is declared");
    load();
    const auto offset = ref.value("offset", std::int64_t{-1});
    const auto rows = ref.value("rows", std::int64_t{1});
    const auto dim = ref.value("dim", std::int64_t{-1});
    if (offset < 0 || offset % 4 != 0 || rows < 0 || dim <= 0) bad(what + " has a malformed sidecar reference");
    const auto end = static_cast<std::uint64_t>(offset) + static_cast<std::uint64_t>(rows * dim) * 4;
    if (end > bytes_.size()) bad(what + " reads past the end of " + path_.string());
    std::vector<Vec> out(static_cast<std::size_t>(rows), Vec(static_cast<std::size_t>(dim)));
    std::size_t at = static_cast<std::size_t>(offset);
    for (auto& row : out) {
      for (auto& x : row) {
        const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + at);
        const std::uint32_t bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                                   std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
        std::memcpy(&x, &bits, 4);
        at += 4;
      }
    }
    return out;
  }

 private:
  void load() {
    if (loaded_) return;
    std::ifstream in(path_, std::ios::binary);
    if (!in) bad("cannot open sidecar " + path_.string());
    bytes_.assign(std::istreambuf_iterator<char>(in), {});
    loaded_ = true;
  }

  fs::path path_;
  std::string bytes_;
  bool loaded_ = false;
};

Vec inline_vector(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + " must be an array of numbers");
  Vec v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) bad(what + " must be an array of numbers");
    v.push_back(x.get<float>());
  }
  return v;
}

Vec single_vector(const json& j, Sidecar& side, const std::string& what) {
  if (j.is_object()) {
    auto rows = side.rows(j, what);
    if (rows.size() != 1) bad(what + " must reference exactly one row");
    return std::move(rows.front());
  }
  return inline_vector(j, what);
}

std::vector<Vec> vector_list(const json& j, Sidecar& side, const std::string& what) {
  if (j.is_object()) return side.rows(j, what);
  if (!j.is_array()) bad(what + " must be a list of vectors");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(single_vector(j[i], side, what + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void append_le(std::string& out, const Vec& v) {
  for (float x : v) {
    std::uint32_t bits;
    std::memcpy(&bits, &x, 4);
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
  }
}

std::optional<double> best_pair(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.empty() || b.empty()) return std::nullopt;
  double best = -1.0;
  for (const auto& x : a) {
    for (const auto& y : b) best = std::max(best, cosine_similarity<float>(x, y));
  }
  return best;
}

std::optional<double> single(const Vec& a, const Vec& b) {
  if (a.empty() || b.empty()) return std::nullopt;
  return cosine_similarity<float>(a, b);
}

}  // namespace

void validate_bundle(const VisualFeatureBundle& b) {
  if (b.image_id.empty()) bad("bundle has no image_id");
  for (std::size_t i = 0; i < b.objects.size(); ++i) {
    check_vector(b.objects[i], kObjectDim, "objects[" + std::to_string(i) + "]");
  }
  for (std::size_t i = 0; i < b.faces.size(); ++i) {
    check_vector(b.faces[i], kFaceDim, "faces[" + std::to_string(i) + "]");
  }
  check_vector(b.place, kPlaceDim, "place");
  check_vector(b.semantic, kSemanticDim, "semantic");
  if (b.caption_text.has_value() != !b.caption_emb.empty()) {
    bad("caption_emb must be present exactly when caption_text is");
  }
  if (b.caption_text) check_vector(b.caption_emb, kCaptionDim, "caption_emb");
}

VisualFeatureBundle bundle_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) bad("bundle document must be a JSON object");
  Sidecar side(j, base_dir);
  VisualFeatureBundle b;
  if (!j.contains("image_id") || !j["image_id"].is_string()) bad("bundle has no image_id");
  b.image_id = j["image_id"].get<std::string>();
  if (j.contains("objects")) b.objects = vector_list(j["objects"], side, "objects");
  if (j.contains("faces")) b.faces = vector_list(j["faces"], side, "faces");
  if (!j.contains("place")) bad("bundle has no place vector");
  b.place = single_vector(j["place"], side, "place");
  if (!j.contains("semantic")) bad("bundle has no semantic vector");
  b.semantic = single_vector(j["semantic"], side, "semantic");
  if (j.contains("caption_text") && j["caption_text"].is_string()) {
    b.caption_text = j["caption_text"].get<std::string>();
  }
  if (j.contains("caption_emb") && !j["caption_emb"].is_null()) {
    b.caption_emb = single_vector(j["caption_emb"], side, "caption_emb");
  }
  if (j.contains("image_class") && j["image_class"].is_string()) {
    b.image_class = j["image_class"].get<std::string>();
  }
  validate_bundle(b);
  return b;
}

VisualFeatureBundle load_bundle(const fs::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open bundle " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    bad(path.string() + ": " + e.what());
  }
  return bundle_from_json(j, path.parent_path());
}

json to_json(const VisualFeatureBundle& b) {
  json j{{"image_id", b.image_id},
         {"objects", b.objects},
         {"faces", b.faces},
         {"place", b.place},
         {"semantic", b.semantic}};
  if (b.caption_text) {
    j["caption_text"] = *b.caption_text;
    j["caption_emb"] = b.caption_emb;
  }
  if (b.image_class) j["image_class"] = *b.image_class;
  return j;
}

void save_bundle(const VisualFeatureBundle& b, const fs::path& json_path, bool with_sidecar) {
  json j = to_json(b);
  if (with_sidecar) {
    auto bin_path = json_path;
    bin_path.replace_extension(".bin");
    std::string bytes;
    auto ref = [&](const std::vector<Vec>& rows, std::size_t dim) {
      json r{{"offset", bytes.size()}, {"rows", rows.size()}, {"dim", dim}};
      for (const auto& v : rows) append_le(bytes, v);
      return r;
    };
    j["sidecar"] = bin_path.filename().string();
    j["objects"] = ref(b.objects, kObjectDim);
    j["faces"] = ref(b.faces, kFaceDim);
    j["place"] = ref({b.place}, b.place.size());
    j["semantic"] = ref({b.semantic}, b.semantic.size());
    if (b.caption_text) j["caption_emb"] = ref({b.caption_emb}, b.caption_emb.size());
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) bad("cannot write " + bin_path.string());
    bin.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  std::ofstream out(json_path);
  if (!out) bad("cannot write " + json_path.string());
  out << j.dump() << "\n";
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::Objects: return "objects";
    case Channel::Faces: return "faces";
    case Channel::Place: return "place";
    case Channel::Semantic: return "semantic";
    case Channel::Caption: return "caption";
  }
  return "?";
}

std::optional<double> channel_score(const VisualFeatureBundle& claim, const VisualFeatureBundle& evidence,
                                    Channel c) {
  switch (c) {
    case Channel::Objects: return best_pair(claim.objects, evidence.objects);
    case Channel::Faces: return best_pair(claim.faces, evidence.faces);
    case Channel::Place: return single(claim.place, evidence.place);
    case Channel::Semantic: return single(claim.semantic, evidence.semantic);
    case Channel::Caption: return single(claim.caption_emb, evidence.caption_emb);
  }
  return std::nullopt;
}

void ImageMatchConfig::validate() const {
  if (!(threshold >= -1.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "image threshold must lie in [-1, 1]");
  }
  if (required_channels < 1 || required_channels > 5) {
    throw Error(ErrorCode::InvalidConfig, "required_channels must be between 1 and 5");
  }
}

double ImageMatchResult::mean_score() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : channel_scores) {
    if (s) {
      sum += *s;
      ++n;
    }
  }
  return n ? sum / n : 0.0;
}

std::vector<Channel> ImageMatchResult::failing_channels(double threshold) const {
  std::vector<Channel> out;
  for (auto c : kChannels) {
    auto s = score(c);
    if (!s || *s < threshold) out.push_back(c);
  }
  return out;
}

ImageMatchResult image_match(const VisualFeatureBundle& claim, const VisualFeatureBundle& evidence,
                             const ImageMatchConfig& cfg) {
  ImageMatchResult r;
  for (auto c : kChannels) {
    if (c == Channel::Caption && !cfg.include_caption) continue;
    auto s = channel_score(claim, evidence, c);
    r.channel_scores[static_cast<std::size_t>(c)] = s;
    if (s && *s >= cfg.threshold) ++r.channels_passed;
  }
  r.matched = r.channels_passed >= cfg.required_channels;
  return r;
}

json to_json(const ImageMatchResult& r) {
  json scores = json::object();
  for (auto c : kChannels) {
    auto s = r.score(c);
    scores[std::string(to_string(c))] = s ? json(*s) : json("ABSENT");
  }
  return json{{"channel_scores", std::move(scores)},
              {"channels_passed", r.channels_passed},
              {"matched", r.matched}};
}

json to_json(const ImageMatchConfig& c) {
  return json{{"threshold", c.threshold},
              {"required_channels", c.required_channels},
              {"include_caption", c.include_caption}};
}

ImageMatchConfig image_match_config_from_json(const json& j, ImageMatchConfig base) {
  base.threshold = j.value("threshold", base.threshold);
  base.required_channels = j.value("required_channels", base.required_channels);
  base.include_caption = j.value("include_caption", base.include_caption);
  base.validate();
  return base;
}

}  // namespace xcheck
