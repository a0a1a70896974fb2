#include "lcdc/topology.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>

namespace lcdc {

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::kServer: return "server";
    case NodeKind::kRsw: return "rsw";
    case NodeKind::kCsw: return "csw";
    case NodeKind::kFc: return "fc";
  }
  return "?";
}

const char* to_string(LinkTier t) {
  switch (t) {
    case LinkTier::kServerRsw: return "server-rsw";
    case LinkTier::kRswCsw: return "rsw-csw";
    case LinkTier::kCswFc: return "csw-fc";
    case LinkTier::kCswRing: return "csw-ring";
    case LinkTier::kFcRing: return "fc-ring";
  }
  return "?";
}

namespace {

void require_positive(std::uint32_t v, const char* field) {
  if (v < 1) throw std::invalid_argument(std::string("site.") + field + " must be >= 1");
}
void require_positive(double v, const char* field) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string("site.") + field + " must be > 0");
}
void require_non_negative(double v, const char* field) {
  if (!(v >= 0.0)) throw std::invalid_argument(std::string("site.") + field + " must be >= 0");
}

constexpr std::uint64_t kServerMacBase = 0x020000000000ULL;
constexpr std::uint64_t kSwitchMacBase = 0x020100000000ULL;

}  // namespace

void SiteConfig::validate() const {
  require_positive(clusters, "clusters");
  require_positive(rsw_per_cluster, "rsw_per_cluster");
  require_positive(csw_per_cluster, "csw_per_cluster");
  require_positive(fc_count, "fc_count");
  require_positive(servers_per_rack, "servers_per_rack");
  require_positive(csw_uplinks, "csw_uplinks");
  require_positive(server_link_bps, "server_link_gbps");
  require_positive(rsw_uplink_bps, "rsw_uplink_gbps");
  require_positive(csw_uplink_bps, "csw_uplink_gbps");
  require_positive(ring_bps, "ring_gbps");
  require_non_negative(server_rsw_m, "server_rsw_m");
  require_non_negative(rsw_csw_m, "rsw_csw_m");
  require_non_negative(csw_fc_m, "csw_fc_m");
  require_non_negative(ring_m, "ring_m");
  if (csw_per_cluster > 4095 || csw_uplinks > 4095) {
    throw std::invalid_argument("site: stage numbers must fit in 12 bits");
  }
}

SiteConfig SiteConfig::desk() {
  SiteConfig c;
  c.clusters = 2;
  c.rsw_per_cluster = 4;
  c.csw_per_cluster = 4;
  c.fc_count = 2;
  c.servers_per_rack = 4;
  return c;
}

SiteConfig SiteConfig::tiny() {
  SiteConfig c;
  c.clusters = 1;
  c.rsw_per_cluster = 2;
  c.csw_per_cluster = 2;
  c.fc_count = 1;
  c.servers_per_rack = 2;
  c.csw_uplinks = 1;
  return c;
}

SimTime link_latency(double length_m) {
  if (!(length_m >= 0.0)) throw std::invalid_argument("link_latency: negative length");
  return SimTime::ps(static_cast<std::uint64_t>(
      std::llround(length_m * static_cast<double>(kPropagationPsPerMeter))));
}

NodeId Topology::add_node(NodeKind kind, std::uint32_t index, std::uint32_t cluster) {
  Node n;
  n.id = static_cast<NodeId>(nodes_.size());
  n.kind = kind;
  n.index = index;
  n.cluster = cluster;
  n.mac = (kind == NodeKind::kServer ? kServerMacBase + index : kSwitchMacBase + n.id);
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

LinkId Topology::add_link(NodeId lower, NodeId upper, double bps, double length_m, LinkTier tier,
                          std::uint32_t stage) {
  Link l;
  l.id = static_cast<LinkId>(links_.size());
  l.lower = {lower, static_cast<PortIndex>(nodes_[lower].ports.size())};
  l.upper = {upper, static_cast<PortIndex>(nodes_[upper].ports.size())};
  l.bandwidth_bps = bps;
  l.length_m = length_m;
  l.latency = link_latency(length_m);
  l.tier = tier;
  l.stage_index = stage;
  nodes_[lower].ports.push_back(l.id);
  nodes_[upper].ports.push_back(l.id);
  links_.push_back(l);
  return l.id;
}

NodeId Topology::rsw_of_server(NodeId server) const {
  const Node& s = node(server);
  if (s.kind != NodeKind::kServer) throw std::invalid_argument("rsw_of_server: not a server");
  return rsws_.at(s.rack);
}

NodeId Topology::csw(std::uint32_t cluster, std::uint32_t i) const {
  return csws_.at(cluster * config_.csw_per_cluster + i);
}

NodeId Topology::rsw(std::uint32_t cluster, std::uint32_t i) const {
  return rsws_.at(cluster * config_.rsw_per_cluster + i);
}

std::vector<LinkId> Topology::stage_links(NodeId sw, std::uint32_t k) const {
  const Node& n = node(sw);
  if (k < 1 || k > n.stage_uplinks.size()) {
    throw std::out_of_range("stage_links: stage " + std::to_string(k) + " outside 1.." +
                            std::to_string(n.stage_uplinks.size()));
  }
  return {n.stage_uplinks.begin(), n.stage_uplinks.begin() + k};
}

LogicalPort Topology::logical_port(NodeId sw) const {
  const Node& n = node(sw);
  switch (n.kind) {
    case NodeKind::kRsw: return n.index;
    case NodeKind::kCsw: return static_cast<LogicalPort>(rsws_.size()) + n.index;
    case NodeKind::kFc:
      return static_cast<LogicalPort>(rsws_.size() + csws_.size()) + n.index;
    case NodeKind::kServer: break;
  }
  throw std::invalid_argument("logical_port: servers have no logical port");
}

std::vector<PortIndex> Topology::ring_ports_toward_anchor(NodeId sw) const {
  const Node& n = node(sw);
  std::uint32_t ring_size = 0;
  std::uint32_t pos = 0;
  if (n.kind == NodeKind::kCsw) {
    ring_size = config_.csw_per_cluster;
    pos = n.index % config_.csw_per_cluster;
  } else if (n.kind == NodeKind::kFc) {
    ring_size = config_.fc_count;
    pos = n.index;
  } else {
    return {};
  }
  if (pos == 0 || ring_size < 2) return {};
  // Walking "up" from pos reaches index 0 after ring_size - pos hops.
  const std::uint32_t up_hops = ring_size - pos;
  const std::uint32_t down_hops = pos;
  std::vector<PortIndex> out;
  if (up_hops <= down_hops) out.insert(out.end(), n.ring_up.begin(), n.ring_up.end());
  if (down_hops <= up_hops) out.insert(out.end(), n.ring_down.begin(), n.ring_down.end());
  std::sort(out.begin(), out.end());
  return out;
}

bool Topology::fully_connected(
    const std::function<bool(const Link&, NodeId from)>& usable) const {
  for (NodeId s : servers_) {
    const Link& l = link(node(s).ports.front());
    if (!usable(l, l.lower.node) || !usable(l, l.upper.node)) return false;
  }
  // Every server pair is connected iff every RSW reaches every other RSW.
  std::vector<char> seen(nodes_.size());
  for (NodeId src : rsws_) {
    std::fill(seen.begin(), seen.end(), 0);
    std::deque<NodeId> frontier{src};
    seen[src] = 1;
    while (!frontier.empty()) {
      const NodeId cur = frontier.front();
      frontier.pop_front();
      for (LinkId lid : node(cur).ports) {
        const Link& l = link(lid);
        const NodeId next = l.far_end(cur).node;
        if (seen[next] || node(next).kind == NodeKind::kServer) continue;
        if (!usable(l, cur)) continue;
        seen[next] = 1;
        frontier.push_back(next);
      }
    }
    for (NodeId r : rsws_) {
      if (!seen[r]) return false;
    }
  }
  return true;
}

namespace {

// Lays `total` ring links over a ring of `members`; two members share one hop.
void wire_ring(const std::vector<NodeId>& members, std::uint32_t total, double bps,
               double length_m, LinkTier tier,
               const std::function<LinkId(NodeId, NodeId, double, double, LinkTier,
                                          std::uint32_t)>& add_link) {
  const auto n = static_cast<std::uint32_t>(members.size());
  if (n < 2 || total == 0) return;
  const std::uint32_t hops = (n == 2) ? 1 : n;
  const std::uint32_t per_hop = std::max<std::uint32_t>(1, total / hops);
  for (std::uint32_t h = 0; h < hops; ++h) {
    for (std::uint32_t j = 0; j < per_hop; ++j) {
      add_link(members[h], members[(h + 1) % n], bps, length_m, tier, 0);
    }
  }
}

}  // namespace

Topology build_site(const SiteConfig& config) {
  config.validate();
  Topology t;
  t.config_ = config;
  const auto& c = config;

  for (std::uint32_t cl = 0; cl < c.clusters; ++cl) {
    for (std::uint32_t i = 0; i < c.csw_per_cluster; ++i) {
      t.csws_.push_back(t.add_node(NodeKind::kCsw, cl * c.csw_per_cluster + i, cl));
    }
  }
  for (std::uint32_t f = 0; f < c.fc_count; ++f) {
    t.fcs_.push_back(t.add_node(NodeKind::kFc, f, 0));
  }
  for (std::uint32_t cl = 0; cl < c.clusters; ++cl) {
    for (std::uint32_t r = 0; r < c.rsw_per_cluster; ++r) {
      const std::uint32_t rack = cl * c.rsw_per_cluster + r;
      const NodeId id = t.add_node(NodeKind::kRsw, rack, cl);
      t.nodes_[id].rack = rack;
      t.rsws_.push_back(id);
    }
  }
  for (std::uint32_t rack = 0; rack < t.rsws_.size(); ++rack) {
    const std::uint32_t cl = rack / c.rsw_per_cluster;
    for (std::uint32_t s = 0; s < c.servers_per_rack; ++s) {
      const NodeId id = t.add_node(NodeKind::kServer, rack * c.servers_per_rack + s, cl);
      t.nodes_[id].rack = rack;
      t.servers_.push_back(id);
    }
  }

  // Server links: server port 0 <-> RSW downlink.
  for (NodeId s : t.servers_) {
    t.add_link(s, t.rsws_[t.nodes_[s].rack], c.server_link_bps, c.server_rsw_m,
               LinkTier::kServerRsw, 0);
  }
  // RSW stage k goes to CSW k-1 of its cluster.
  for (NodeId r : t.rsws_) {
    const std::uint32_t cl = t.nodes_[r].cluster;
    for (std::uint32_t k = 1; k <= c.csw_per_cluster; ++k) {
      const LinkId l = t.add_link(r, t.csw(cl, k - 1), c.rsw_uplink_bps, c.rsw_csw_m,
                                  LinkTier::kRswCsw, k);
      t.nodes_[r].stage_uplinks.push_back(l);
    }
  }
  // CSW stage k goes to FC (k-1) mod fc_count.
  for (NodeId s : t.csws_) {
    for (std::uint32_t k = 1; k <= c.csw_uplinks; ++k) {
      const LinkId l = t.add_link(s, t.fcs_[(k - 1) % c.fc_count], c.csw_uplink_bps, c.csw_fc_m,
                                  LinkTier::kCswFc, k);
      t.nodes_[s].stage_uplinks.push_back(l);
    }
  }

  auto add = [&t](NodeId a, NodeId b, double bps, double m, LinkTier tier, std::uint32_t stage) {
    const LinkId id = t.add_link(a, b, bps, m, tier, stage);
    const Link& l = t.links_[id];
    t.nodes_[a].ring_up.push_back(l.lower.port);
    t.nodes_[b].ring_down.push_back(l.upper.port);
    return id;
  };
  for (std::uint32_t cl = 0; cl < c.clusters; ++cl) {
    std::vector<NodeId> ring;
    for (std::uint32_t i = 0; i < c.csw_per_cluster; ++i) ring.push_back(t.csw(cl, i));
    wire_ring(ring, c.csw_ring_links, c.ring_bps, c.ring_m, LinkTier::kCswRing, add);
  }
  wire_ring(t.fcs_, c.fc_ring_links, c.ring_bps, c.ring_m, LinkTier::kFcRing, add);
  return t;
}

}  // namespace lcdc
