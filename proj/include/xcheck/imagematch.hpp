#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace xcheck {

using Vec = std::vector<float>;

inline constexpr std::size_t kObjectDim = 2048;
inline constexpr std::size_t kFaceDim = 512;
inline constexpr std::size_t kPlaceDim = 2048;
inline constexpr std::size_t kSemanticDim = 1000;
inline constexpr std::size_t kCaptionDim = 768;

// Visual features for one image. Objects and faces are per-instance; the rest
// are whole-image vectors. image_class is extractor metadata ("photo",
// "website", ...) used only by corpus filtering.
struct VisualFeatureBundle {
  std::string image_id;
  std::vector<Vec> objects;
  std::vector<Vec> faces;
  Vec place;
  Vec semantic;
  std::optional<std::string> caption_text;
  Vec caption_emb;
  std::optional<std::string> image_class;

  bool operator==(const VisualFeatureBundle&) const = default;
};

// Throws InvalidBundle on wrong dims, non-finite or all-zero vectors, or a
// caption text/embedding mismatch.
void validate_bundle(const VisualFeatureBundle& b);

// Parses a bundle document. Vector fields are either inline arrays or
// {"offset": bytes, "rows": n, "dim": d} references into the sidecar named by
// the top-level "sidecar" key, resolved against base_dir.
VisualFeatureBundle bundle_from_json(const nlohmann::json& j,
                                     const std::filesystem::path& base_dir = {});
VisualFeatureBundle load_bundle(const std::filesystem::path& path);

nlohmann::json to_json(const VisualFeatureBundle& b);
// Writes JSON plus a little-endian float32 sidecar next to it (same stem, .bin).
void save_bundle(const VisualFeatureBundle& b, const std::filesystem::path& json_path,
                 bool with_sidecar = false);

enum class Channel { Objects, Faces, Place, Semantic, Caption };
inline constexpr std::array<Channel, 5> kChannels = {Channel::Objects, Channel::Faces, Channel::Place,
                                                     Channel::Semantic, Channel::Caption};
std::string_view to_string(Channel c);

// nullopt means ABSENT: one side lacks the channel. Throws DimMismatch.
std::optional<double> channel_score(const VisualFeatureBundle& claim, const VisualFeatureBundle& evidence,
                                    Channel c);

struct ImageMatchConfig {
  double threshold = 0.9;
  int required_channels = 3;
  // With the caption channel off, only four channels are scored.
  bool include_caption = true;

  void validate() const;
};

struct ImageMatchResult {
  std::array<std::optional<double>, 5> channel_scores{};
  int channels_passed = 0;
  bool matched = false;

  std::optional<double> score(Channel c) const { return channel_scores[static_cast<std::size_t>(c)]; }
  // Mean over present channels, 0 when none are present.
  double mean_score() const;
  std::vector<Channel> failing_channels(double threshold) const;
};

ImageMatchResult image_match(const VisualFeatureBundle& claim, const VisualFeatureBundle& evidence,
                             const ImageMatchConfig& cfg = {});

nlohmann::json to_json(const ImageMatchResult& r);
nlohmann::json to_json(const ImageMatchConfig& c);
ImageMatchConfig image_match_config_from_json(const nlohmann::json& j, ImageMatchConfig base = {});

}  // namespace xcheck
