#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lcdc/sim_time.hpp"

namespace lcdc {

using NodeId = std::uint32_t;
using LinkId = std::uint32_t;
using PortIndex = std::uint32_t;
using LogicalPort = std::uint32_t;

enum class NodeKind : std::uint8_t { kServer, kRsw, kCsw, kFc };
enum class LinkTier : std::uint8_t { kServerRsw, kRswCsw, kCswFc, kCswRing, kFcRing };

const char* to_string(NodeKind k);
const char* to_string(LinkTier t);

/// Shape of the simulated site. Defaults describe the full four-cluster site.
struct SiteConfig {
  std::uint32_t clusters = 4;
  std::uint32_t rsw_per_cluster = 32;
  std::uint32_t csw_per_cluster = 4;
  std::uint32_t fc_count = 4;
  std::uint32_t servers_per_rack = 48;
  std::uint32_t csw_uplinks = 4;  // spread round-robin over the FCs

  double server_link_bps = 10e9;
  double rsw_uplink_bps = 10e9;
  double csw_uplink_bps = 40e9;
  double ring_bps = 10e9;
  std::uint32_t csw_ring_links = 8;  // per cluster
  std::uint32_t fc_ring_links = 16;

  double server_rsw_m = 2.0;
  double rsw_csw_m = 20.0;
  double csw_fc_m = 100.0;
  double ring_m = 10.0;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  static SiteConfig full() { return {}; }
  // 2 clusters x 4 RSWs x 4 CSWs x 2 FCs x 4 servers/rack.
  static SiteConfig desk();
  // 1 cluster x 2 RSWs x 2 CSWs x 1 FC x 2 servers/rack.
  static SiteConfig tiny();

  bool operator==(const SiteConfig&) const = default;
};

struct LinkEnd {
  NodeId node = 0;
  PortIndex port = 0;
};

/// Bidirectional link. For stage-indexed uplinks `lower` is the switch that owns
/// the stage (RSW for RSW-CSW, CSW for CSW-FC); for server links it is the server.
struct Link {
  LinkId id = 0;
  LinkEnd lower;
  LinkEnd upper;
  double bandwidth_bps = 0;
  double length_m = 0;
  SimTime latency;
  LinkTier tier = LinkTier::kServerRsw;
  std::uint32_t stage_index = 0;  // 0 for links that are never gated

  bool gated() const { return stage_index > 0; }
  const LinkEnd& end_of(NodeId n) const { return lower.node == n ? lower : upper; }
  const LinkEnd& far_end(NodeId n) const { return lower.node == n ? upper : lower; }
};

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::kServer;
  std::uint32_t index = 0;    // index within its kind
  std::uint32_t cluster = 0;  // FCs use 0
  std::uint32_t rack = 0;     // servers: RSW index hosting them; RSWs: own index
  std::uint64_t mac = 0;
  std::vector<LinkId> ports;  // port index -> link
  std::vector<LinkId> stage_uplinks;  // stage k at position k-1
  std::vector<PortIndex> ring_up;      // ring ports toward index + 1
  std::vector<PortIndex> ring_down;    // ring ports toward index - 1
};

/// Propagation delay through fiber (5 ns per meter).
SimTime link_latency(double length_m);

inline constexpr std::uint64_t kPropagationPsPerMeter = 5'000;

class Topology {
 public:
  const SiteConfig& config() const { return config_; }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  const Link& link(LinkId id) const { return links_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  const std::vector<NodeId>& servers() const { return servers_; }
  const std::vector<NodeId>& rsws() const { return rsws_; }
  const std::vector<NodeId>& csws() const { return csws_; }
  const std::vector<NodeId>& fcs() const { return fcs_; }
  std::size_t switch_count() const { return rsws_.size() + csws_.size() + fcs_.size(); }

  NodeId server(std::uint32_t index) const { return servers_.at(index); }
  NodeId rsw_of_server(NodeId server) const;
  NodeId csw(std::uint32_t cluster, std::uint32_t i) const;
  NodeId rsw(std::uint32_t cluster, std::uint32_t i) const;

  std::uint32_t max_stage(NodeId sw) const {
    return static_cast<std::uint32_t>(node(sw).stage_uplinks.size());
  }
  // Uplinks with stage_index in 1..=k. Throws std::out_of_range for k outside 1..max.
  std::vector<LinkId> stage_links(NodeId sw, std::uint32_t k) const;

  // Destination-switch identifier: RSWs first, then CSWs, then FCs.
  LogicalPort logical_port(NodeId sw) const;
  std::uint32_t logical_port_count() const {
    return static_cast<std::uint32_t>(switch_count());
  }

  // The CSW (cluster anchor) that holds every RSW's stage-1 uplink, and the FC
  // holding every CSW's stage-1 uplink.
  NodeId anchor_csw(std::uint32_t cluster) const { return csw(cluster, 0); }
  NodeId anchor_fc() const { return fcs_.front(); }

  // Ring neighbours of a CSW (within its cluster) or FC, as port lists toward
  // the anchor along the shortest ring direction. Empty when already at anchor.
  std::vector<PortIndex> ring_ports_toward_anchor(NodeId sw) const;

  // Servers reachable from every server using only links accepted by `usable`,
  // where `usable(link, from_node)` answers for the given transmit direction.
  bool fully_connected(
      const std::function<bool(const Link&, NodeId from)>& usable) const;

 private:
  friend Topology build_site(const SiteConfig& config);

  NodeId add_node(NodeKind kind, std::uint32_t index, std::uint32_t cluster);
  LinkId add_link(NodeId lower, NodeId upper, double bps, double length_m, LinkTier tier,
                  std::uint32_t stage);

  SiteConfig config_;
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<NodeId> servers_, rsws_, csws_, fcs_;
};

Topology build_site(const SiteConfig& config);

}  // namespace lcdc
