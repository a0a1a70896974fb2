#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lcdc/server_node.hpp"
#include "lcdc/switch_dataplane.hpp"
#include "lcdc/topology.hpp"
#include "lcdc/traffic.hpp"
#include "lcdc/transceiver.hpp"

namespace lcdc {

enum class ModeSelection : std::uint8_t { kGated, kAlwaysOn, kBoth };

const char* to_string(ModeSelection m);
ModeSelection parse_mode(const std::string& text);

struct TierTransceivers {
  TransceiverParams server = TransceiverParams::sfp_plus();
  TransceiverParams rsw_csw = TransceiverParams::sfp_plus();
  TransceiverParams csw_fc = TransceiverParams::qsfp();
  TransceiverParams ring = TransceiverParams::sfp_plus();

  const TransceiverParams& for_tier(LinkTier t) const;
  bool operator==(const TierTransceivers&) const = default;
};

struct SwitchSettings {
  Watermarks watermarks;
  SimTime holddown = SimTime::us(50);
  std::uint32_t queue_capacity = 128;  // packets per output queue
  std::uint16_t control_ttl = 3;
  bool flow_control = false;  // pause upstream instead of dropping on a full queue

  bool operator==(const SwitchSettings&) const = default;
};

struct WorkloadSettings {
  std::string profile = "fb-web";
  double load = 0.30;  // fraction of server link rate
  std::optional<LocalityMix> locality;  // profile default when unset
  std::string trace;  // replay this file instead of sampling
  std::string data_dir;  // workload CDFs; the installed data directory when empty

  bool operator==(const WorkloadSettings&) const = default;
};

struct RunSettings {
  ModeSelection mode = ModeSelection::kBoth;
  std::uint64_t seed = 1;
  SimTime duration = SimTime::ms(10);
  std::string output_dir = "out";
  bool exact_latency = false;
  bool connectivity_probe = true;
  std::uint32_t histogram_buckets = 8;

  bool operator==(const RunSettings&) const = default;
};

/// Everything one `run` needs. Parsed from sectioned key = value text.
struct ScenarioConfig {
  SiteConfig site = SiteConfig::desk();
  TierTransceivers transceivers;
  SwitchSettings switches;
  NodePipelineParams server;
  WorkloadSettings workload;
  RunSettings run;

  // Throws std::invalid_argument naming the first offending key.
  void validate() const;

  // Unknown sections or keys are rejected.
  static ScenarioConfig parse(const std::string& text, const std::string& origin = "<config>");
  static ScenarioConfig load(const std::filesystem::path& path);

  // Applies one "section.key=value" override.
  void apply_override(const std::string& assignment);

  // Every effective setting, re-parseable to an identical config.
  std::string serialize() const;

  // Digest of the serialized config without the run mode and output path.
  std::uint64_t digest() const;

  bool operator==(const ScenarioConfig&) const = default;
};

// Site presets accepted by --scale: full, desk, tiny.
SiteConfig site_preset(const std::string& name);

std::filesystem::path default_data_dir();

}  // namespace lcdc
