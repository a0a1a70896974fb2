#include "lcdc/simulation.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>

#include "lcdc/control_frame.hpp"
#include "lcdc/event_queue.hpp"
#include "lcdc/server_node.hpp"
#include "lcdc/stage_controller.hpp"
#include "lcdc/switch_dataplane.hpp"
#include "lcdc/transceiver.hpp"

namespace lcdc {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint64_t kBroadcastMac = 0xFFFF'FFFF'FFFFULL;

std::uint64_t pack(std::uint32_t lo, std::uint32_t hi) {
  return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}
std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

struct Packet {
  std::uint32_t flow = 0;
  std::uint32_t dst_server = 0;
  std::uint32_t bytes = 0;
  std::uint16_t hops = 0;
  bool control = false;
  SimTime first_tx;
  ControlFrameBytes frame{};
};

struct FlowState {
  SimTime submit;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint64_t size = 0;
  std::uint32_t outstanding = 0;
};

struct Port {
  LinkId link = 0;
  NodeId far_node = 0;
  PortIndex far_port = 0;
  bool to_server = false;
  bool ring = false;
  bool owner = false;         // this switch owns the link's stage
  std::uint32_t stage = 0;    // stage index of a gated link, else 0
  double bps = 0;
  SimTime latency;
  std::deque<std::uint32_t> queue;
  // Packets waiting at ingress for room in `queue`, with their input port.
  std::deque<std::pair<std::uint32_t, PortIndex>> held;
  std::uint32_t held_from = 0;  // packets from this port's link held anywhere in the switch
  bool busy = false;
  bool paused = false;  // the far end asked us to stop sending
  bool peer_acked = false;
  Transceiver xcvr{TransceiverParams{}};
  // Far end of another switch's stage link.
  bool peer_enabled = true;
  bool peer_draining = false;
  bool pending_off = false;
  // Far end is a cluster switch: its cluster and position in the cluster.
  std::uint32_t far_csw_cluster = kNone;
  std::uint32_t far_csw_pos = kNone;
};

struct Server {
  NodeId node = 0;
  LinkId link = 0;
  NodeId rsw = 0;
  PortIndex rsw_port = 0;
  double bps = 0;
  SimTime latency;
  ServerNic nic;
  bool paused = false;
};

}  // namespace

struct Simulation::Impl : EventHandler {
  struct Switch;

  class Actions final : public StageActions {
   public:
    Actions(Impl& sim, std::uint32_t sw) : sim_(sim), sw_(sw) {}
    SimTime request_laser_on(std::uint32_t stage) override { return sim_.owner_laser_on(sw_, stage); }
    void request_laser_off(std::uint32_t stage) override { sim_.owner_laser_off(sw_, stage); }
    void send_control(ControlOpcode op, std::uint32_t stage) override {
      sim_.send_control(sw_, op, stage, sim_.switches_[sw_].node);
    }
    bool uplink_drained(std::uint32_t stage) override {
      const Port& p = sim_.switches_[sw_].ports[sim_.switches_[sw_].stage_ports[stage - 1]];
      return sim_.port_idle(p);
    }
    void stages_changed() override { sim_.stages_changed(sw_); }

   private:
    Impl& sim_;
    std::uint32_t sw_;
  };

  struct Switch {
    NodeId node = 0;
    NodeKind kind = NodeKind::kRsw;
    std::vector<Port> ports;
    std::vector<PortIndex> stage_ports;  // owned stage k at k-1
    CamTables cam;
    PortMask usable;
    PortMask switch_facing;
    std::optional<StageController> ctl;
    std::optional<BacklogMonitor> monitor;
    std::optional<IngressArbiter<std::uint32_t>> arbiter;
    bool arbitrate_pending = false;
    SimTime recheck_at = SimTime::max();
    std::vector<std::uint32_t> rsw_view;  // per RSW index: bit k set when stage k is enabled
    std::unique_ptr<Actions> actions;
  };

  Impl(const ScenarioConfig& cfg, RunMode m, std::vector<FlowSpec> f, SimulationHooks h)
      : config(cfg), mode(m), topo(build_site(cfg.site)), flows(std::move(f)), hooks(std::move(h)) {
    config.validate();
    gated = mode == RunMode::kGated;
    metrics.mode = mode;
    metrics.config_digest = config.digest();
    metrics.duration = config.run.duration;
    metrics.packet_latency = LatencyStats(config.run.exact_latency);
    metrics.network_latency = LatencyStats(config.run.exact_latency);
    pipeline = switch_pipeline_delay();
    cycle = SimTime::ps(static_cast<std::uint64_t>(std::llround(1e12 / kSwitchClockHz)));
    build_switches();
    build_servers();
    build_tables();
    build_timeline();
    for (auto& sw : switches_) recompute_usable(sw, false);
  }

  // ---------------------------------------------------------------- build

  void build_switches() {
    sw_of_node.assign(topo.nodes().size(), kNone);
    const auto add = [&](NodeId id) {
      sw_of_node[id] = static_cast<std::uint32_t>(switches_.size());
      switches_.emplace_back();
      switches_.back().node = id;
      switches_.back().kind = topo.node(id).kind;
    };
    for (NodeId id : topo.rsws()) add(id);
    for (NodeId id : topo.csws()) add(id);
    for (NodeId id : topo.fcs()) add(id);

    const auto& site = config.site;
    for (std::uint32_t s = 0; s < switches_.size(); ++s) {
      Switch& sw = switches_[s];
      const Node& n = topo.node(sw.node);
      sw.ports.resize(n.ports.size());
      sw.stage_ports.assign(n.stage_uplinks.size(), 0);
      for (PortIndex p = 0; p < n.ports.size(); ++p) {
        const Link& l = topo.link(n.ports[p]);
        Port& port = sw.ports[p];
        port.link = l.id;
        port.far_node = l.far_end(sw.node).node;
        port.far_port = l.far_end(sw.node).port;
        port.to_server = topo.node(port.far_node).kind == NodeKind::kServer;
        port.ring = l.tier == LinkTier::kCswRing || l.tier == LinkTier::kFcRing;
        port.bps = l.bandwidth_bps;
        port.latency = l.latency;
        port.stage = l.stage_index;
        port.owner = l.gated() && l.lower.node == sw.node;
        const bool starts_off = gated && l.gated() && l.stage_index > 1;
        port.xcvr = Transceiver(config.transceivers.for_tier(l.tier),
                                starts_off ? LaserMode::kOff : LaserMode::kOn);
        port.peer_enabled = !starts_off;
        if (port.owner) sw.stage_ports[l.stage_index - 1] = p;
        const Node& far = topo.node(port.far_node);
        if (far.kind == NodeKind::kCsw) {
          port.far_csw_cluster = far.cluster;
          port.far_csw_pos = far.index % site.csw_per_cluster;
        }
      }
      sw.usable = PortMask(sw.ports.size());
      sw.switch_facing = PortMask(sw.ports.size());
      for (PortIndex p = 0; p < sw.ports.size(); ++p) {
        if (!sw.ports[p].to_server) sw.switch_facing.set(p);
      }
      sw.arbiter.emplace(sw.ports.size());
      sw.actions = std::make_unique<Actions>(*this, s);
      if (!n.stage_uplinks.empty()) {
        sw.ctl.emplace(static_cast<std::uint32_t>(n.stage_uplinks.size()), config.switches.holddown, !gated);
        sw.monitor.emplace(config.switches.queue_capacity, config.switches.watermarks);
      }
      if (sw.kind != NodeKind::kCsw) {
        const std::uint32_t all = (1u << (site.csw_per_cluster + 1)) - 2;
        sw.rsw_view.assign(topo.rsws().size(), gated ? 0b10u : all);
      }
    }
  }

  void build_servers() {
    NodePipelineParams np = config.server;
    if (!gated) np.gate_nic = false;
    servers_.reserve(topo.servers().size());
    server_of_node.assign(topo.nodes().size(), kNone);
    for (NodeId id : topo.servers()) {
      const Node& n = topo.node(id);
      const Link& l = topo.link(n.ports.front());
      server_of_node[id] = static_cast<std::uint32_t>(servers_.size());
      servers_.push_back(Server{id, l.id, l.upper.node, l.upper.port, l.bandwidth_bps, l.latency,
                                ServerNic(np, config.transceivers.server), false});
    }
  }

  void build_tables() {
    const std::uint32_t nl = topo.logical_port_count();
    for (Switch& sw : switches_) {
      const Node& n = topo.node(sw.node);
      const auto stages = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(n.stage_uplinks.size()));
      sw.cam = CamTables(sw.ports.size(), stages, nl);
      const LogicalPort self = topo.logical_port(sw.node);
      for (std::uint32_t i = 0; i < servers_.size(); ++i) {
        const Server& srv = servers_[i];
        const std::uint64_t mac = topo.node(srv.node).mac;
        if (srv.rsw == sw.node) {
          sw.cam.program_host(mac, self, srv.rsw_port);
        } else {
          sw.cam.program_logical(mac, topo.logical_port(srv.rsw));
        }
      }
      PortMask ring_detour(sw.ports.size());
      for (PortIndex p : topo.ring_ports_toward_anchor(sw.node)) ring_detour.set(p);

      for (NodeId rsw : topo.rsws()) {
        if (rsw == sw.node) continue;
        const LogicalPort lp = topo.logical_port(rsw);
        const std::uint32_t cl = topo.node(rsw).cluster;
        if (sw.kind == NodeKind::kRsw || (sw.kind == NodeKind::kCsw && n.cluster != cl)) {
          // Upward over the owned stages 1..k.
          for (std::uint32_t k = 1; k <= stages; ++k) {
            PortMask m(sw.ports.size());
            for (std::uint32_t j = 0; j < k; ++j) m.set(sw.stage_ports[j]);
            sw.cam.program_stage_map(k, lp, m);
          }
        } else if (sw.kind == NodeKind::kCsw) {
          // Same cluster: the direct link, else around the ring to the anchor.
          PortMask m(sw.ports.size());
          for (PortIndex p = 0; p < sw.ports.size(); ++p) {
            if (sw.ports[p].far_node == rsw) m.set(p);
          }
          for (std::uint32_t k = 1; k <= stages; ++k) sw.cam.program_stage_map(k, lp, m);
          sw.cam.program_detour(lp, ring_detour);
        } else {
          // Fat cat: any link into the destination cluster, else toward the anchor FC.
          PortMask m(sw.ports.size());
          for (PortIndex p = 0; p < sw.ports.size(); ++p) {
            if (sw.ports[p].far_csw_cluster == cl) m.set(p);
          }
          sw.cam.program_stage_map(1, lp, m);
          sw.cam.program_detour(lp, ring_detour);
        }
      }
    }
  }

  void build_timeline() {
    std::vector<std::uint32_t> ids;
    std::vector<bool> on;
    timeline_slot.assign(topo.links().size(), kNone);
    for (const Link& l : topo.links()) {
      if (l.stage_index < 2) continue;
      timeline_slot[l.id] = static_cast<std::uint32_t>(ids.size());
      ids.push_back(l.id);
      on.push_back(!gated);
    }
    metrics.timeline.emplace(std::move(ids), std::move(on), SimTime{}, config.run.histogram_buckets);
  }

  // ----------------------------------------------------------- packet pool

  std::uint32_t alloc_packet() {
    if (!free_packets.empty()) {
      const std::uint32_t id = free_packets.back();
      free_packets.pop_back();
      packets[id] = Packet{};
      return id;
    }
    packets.emplace_back();
    return static_cast<std::uint32_t>(packets.size() - 1);
  }
  void free_packet(std::uint32_t id) { free_packets.push_back(id); }

  // ------------------------------------------------------------ servers

  void nic_try_tx(std::uint32_t s) {
    Server& srv = servers_[s];
    if (srv.paused || !srv.nic.can_transmit(engine.now())) return;
    const std::uint32_t pid = srv.nic.pop_next();
    srv.nic.start_tx();
    Packet& pkt = packets[pid];
    pkt.first_tx = engine.now();
    const SimTime ser = serialization_time(pkt.bytes, srv.bps);
    engine.schedule_in(ser, EventKind::kNicTxDone, srv.node);
    engine.schedule_in(ser + srv.latency, EventKind::kPacketArrival, srv.rsw, pack(pid, srv.rsw_port + 1));
  }

  void on_flow_injection(std::uint32_t s, std::uint32_t flow_id) {
    Server& srv = servers_[s];
    const SimTime ready = srv.nic.submit_flow(engine.now());
    engine.schedule(ready, EventKind::kPacketsReady, srv.node, flow_id);
    const SimTime laser = srv.nic.laser_ready_at(engine.now());
    if (laser > ready) engine.schedule(laser, EventKind::kLaserReady, srv.node);
  }

  void on_packets_ready(std::uint32_t s, std::uint32_t flow_id) {
    FlowState& f = flow_state[flow_id];
    const auto sizes = flow_to_packets(f.size, config.server.mtu);
    std::vector<std::uint32_t> ids;
    ids.reserve(sizes.size());
    for (auto bytes : sizes) {
      const std::uint32_t pid = alloc_packet();
      Packet& p = packets[pid];
      p.flow = flow_id;
      p.dst_server = f.dst;
      p.bytes = bytes;
      ids.push_back(pid);
    }
    f.outstanding = static_cast<std::uint32_t>(ids.size());
    metrics.packets_injected += ids.size();
    servers_[s].nic.packets_ready(ids);
    nic_try_tx(s);
  }

  void on_nic_tx_done(std::uint32_t s) {
    Server& srv = servers_[s];
    srv.nic.tx_done(engine.now());
    nic_try_tx(s);
    if (srv.nic.params().gate_nic && !srv.nic.busy() && !srv.nic.has_pending()) {
      engine.schedule_in(srv.nic.params().nic_idle_timeout, EventKind::kNicIdleCheck, srv.node);
    }
  }

  void on_delivery(std::uint32_t pid) {
    const Packet& pkt = packets[pid];
    FlowState& f = flow_state[pkt.flow];
    metrics.packet_latency.record_delivery(f.submit, engine.now());
    metrics.network_latency.record_delivery(pkt.first_tx, engine.now());
    ++metrics.packets_delivered;
    if (--f.outstanding == 0) {
      metrics.flow_completion[pkt.flow] = engine.now();
      ++metrics.flows_completed;
    }
    free_packet(pid);
  }

  // ----------------------------------------------------------- switches

  void on_packet_arrival(std::uint32_t s, std::uint32_t pid, std::uint32_t port) {
    Switch& sw = switches_[s];
    sw.arbiter->push(port, pid);
    kick_arbiter(s);
  }

  void kick_arbiter(std::uint32_t s) {
    Switch& sw = switches_[s];
    if (sw.arbitrate_pending) return;
    sw.arbitrate_pending = true;
    engine.schedule(engine.now(), EventKind::kArbitrate, sw.node);
  }

  void on_arbitrate(std::uint32_t s) {
    Switch& sw = switches_[s];
    auto item = sw.arbiter->next();
    if (!item) {
      sw.arbitrate_pending = false;
      return;
    }
    const auto [input, pid] = *item;
    const std::uint32_t tag =
        input == IngressArbiter<std::uint32_t>::kVirtualPort ? 0 : static_cast<std::uint32_t>(input) + 1;
    engine.schedule_in(pipeline, EventKind::kPipelineDone, sw.node, pack(pid, tag));
    if (sw.arbiter->empty()) {
      sw.arbitrate_pending = false;
    } else {
      engine.schedule_in(cycle, EventKind::kArbitrate, sw.node);
    }
  }

  void on_pipeline_done(std::uint32_t s, std::uint32_t pid, std::uint32_t tag) {
    if (packets[pid].control) {
      handle_control(s, pid, tag);
    } else {
      route_data(s, pid, tag);
    }
  }

  std::vector<std::uint32_t> backlogs(const Switch& sw) const {
    std::vector<std::uint32_t> b(sw.ports.size());
    for (std::size_t p = 0; p < sw.ports.size(); ++p) {
      const Port& port = sw.ports[p];
      b[p] = static_cast<std::uint32_t>(port.queue.size() + port.held.size()) + (port.busy ? 1 : 0);
    }
    return b;
  }

  static bool port_idle(const Port& p) { return p.queue.empty() && p.held.empty() && !p.busy; }

  void route_data(std::uint32_t s, std::uint32_t pid, std::uint32_t tag) {
    Switch& sw = switches_[s];
    const Packet& pkt = packets[pid];
    const Server& dst = servers_[pkt.dst_server];
    const auto hit = sw.cam.lookup_logical(topo.node(dst.node).mac);
    if (!hit) {
      ++metrics.drops.lookup;
      free_packet(pid);
      return;
    }
    if (hit->local_port) {
      enqueue(s, *hit->local_port, pid, tag);
      return;
    }
    const std::uint32_t stage = sw.ctl ? sw.ctl->active_stage() : 1;
    PortMask cand = sw.cam.stage_map(stage, hit->logical_port) & sw.usable;
    if (cand.any() && !sw.rsw_view.empty()) {
      // Prefer cluster switches known to hold a direct link to the destination rack.
      const Node& rsw = topo.node(dst.rsw);
      const std::uint32_t view = sw.rsw_view[rsw.index];
      PortMask preferred(sw.ports.size());
      for (auto p = cand.find_first(); p != PortMask::npos; p = cand.find_next(p)) {
        const Port& port = sw.ports[p];
        if (port.far_csw_cluster == rsw.cluster && (view >> (port.far_csw_pos + 1) & 1u)) preferred.set(p);
      }
      if (preferred.any()) cand = preferred;
    }
    if (cand.none()) cand = sw.cam.detour(hit->logical_port) & sw.usable;
    const auto b = backlogs(sw);
    const auto out = schedule_output(cand, sw.usable, b, false);
    if (out.empty()) {
      ++metrics.drops.gating;
      free_packet(pid);
      return;
    }
    enqueue(s, out.front(), pid, tag);
  }

  // `tag` is the input port + 1, or 0 for locally generated frames.
  void enqueue(std::uint32_t s, PortIndex p, std::uint32_t pid, std::uint32_t tag) {
    Switch& sw = switches_[s];
    Port& port = sw.ports[p];
    if (!packets[pid].control && (port.queue.size() >= config.switches.queue_capacity || !port.held.empty())) {
      if (!config.switches.flow_control || tag == 0) {
        ++metrics.drops.buffer;
        free_packet(pid);
        return;
      }
      // Lossless: keep the packet at ingress and pause the sending link.
      port.held.emplace_back(pid, tag - 1);
      if (sw.ports[tag - 1].held_from++ == 0) set_paused(sw.ports[tag - 1], true);
      return;
    }
    if (packets[pid].control) {
      // Control frames jump the data backlog, behind earlier control frames.
      auto it = port.queue.begin();
      while (it != port.queue.end() && packets[*it].control) ++it;
      port.queue.insert(it, pid);
    } else {
      port.queue.push_back(pid);
    }
    port_try_tx(s, p);
    if (port.owner) evaluate(s);
  }

  void port_try_tx(std::uint32_t s, PortIndex p) {
    Switch& sw = switches_[s];
    Port& port = sw.ports[p];
    if (port.busy || port.queue.empty()) return;
    if (port.xcvr.mode_at(engine.now()) != LaserMode::kOn) return;
    if (port.paused && !packets[port.queue.front()].control) return;
    const std::uint32_t pid = port.queue.front();
    port.queue.pop_front();
    port.busy = true;
    admit_held(sw, port);
    Packet& pkt = packets[pid];
    if (pkt.control) {
      ++pkt.hops;
      metrics.control_max_hops = std::max<std::uint64_t>(metrics.control_max_hops, pkt.hops);
    }
    const SimTime ser = serialization_time(pkt.bytes, port.bps);
    engine.schedule_in(ser, EventKind::kPortTxDone, sw.node, p);
    if (port.to_server) {
      engine.schedule_in(ser + port.latency, EventKind::kDelivery, port.far_node, pid);
    } else {
      engine.schedule_in(ser + port.latency, EventKind::kPacketArrival, port.far_node,
                         pack(pid, port.far_port + 1));
    }
    if (port.owner) evaluate(s);
  }

  void on_port_tx_done(std::uint32_t s, PortIndex p) {
    Switch& sw = switches_[s];
    Port& port = sw.ports[p];
    port.busy = false;
    port_try_tx(s, p);
    if (!port_idle(port)) return;
    if (port.owner && sw.ctl->status(port.stage) == StageStatus::kDraining) {
      sw.ctl->on_drained(port.stage, engine.now(), *sw.actions);
    }
    if (port.peer_draining) finish_peer_disable(s, p);
  }

  // Moves held packets into the queue as room frees up and releases the
  // pause on links with nothing left held.
  void admit_held(Switch& sw, Port& port) {
    while (!port.held.empty() && port.queue.size() < config.switches.queue_capacity) {
      const auto [pid, input] = port.held.front();
      port.held.pop_front();
      port.queue.push_back(pid);
      if (--sw.ports[input].held_from == 0) set_paused(sw.ports[input], false);
    }
  }

  // Pauses or resumes the transmitter at the far end of `in`'s link.
  void set_paused(const Port& in, bool paused) {
    if (const std::uint32_t srv = server_of_node[in.far_node]; srv != kNone) {
      servers_[srv].paused = paused;
      if (!paused) pending_resume.push_back({in.far_node, 0});
      return;
    }
    const std::uint32_t far = sw_of_node[in.far_node];
    switches_[far].ports[in.far_port].paused = paused;
    if (!paused) pending_resume.push_back({in.far_node, in.far_port + 1});
  }

  // Restarts transmitters released by set_paused, outside the dequeue path.
  void flush_resumes() {
    while (!pending_resume.empty()) {
      const auto [node, tag] = pending_resume.front();
      pending_resume.pop_front();
      if (tag == 0) {
        nic_try_tx(server_of_node[node]);
      } else {
        port_try_tx(sw_of_node[node], tag - 1);
      }
    }
  }

  // ------------------------------------------------------ stage control

  void evaluate(std::uint32_t s) {
    Switch& sw = switches_[s];
    if (!gated || !sw.ctl) return;
    const std::uint32_t active = sw.ctl->active_stage();
    std::uint32_t depths[16];
    std::vector<std::uint32_t> spill;
    std::uint32_t* d = depths;
    if (active > 16) {
      spill.resize(active);
      d = spill.data();
    }
    for (std::uint32_t k = 1; k <= active; ++k) {
      d[k - 1] = static_cast<std::uint32_t>(sw.ports[sw.stage_ports[k - 1]].queue.size());
    }
    const auto trig = sw.monitor->evaluate(std::span<const std::uint32_t>(d, active), active,
                                           sw.ctl->max_stage(), sw.ctl->holddown_expired(engine.now()));
    if (trig == StageTrigger::kStageUp) {
      sw.ctl->stage_up(engine.now(), *sw.actions);
    } else if (trig == StageTrigger::kStageDown) {
      sw.ctl->stage_down(engine.now(), *sw.actions);
    }
  }

  SimTime owner_laser_on(std::uint32_t s, std::uint32_t stage) {
    Switch& sw = switches_[s];
    const PortIndex p = sw.stage_ports[stage - 1];
    Port& port = sw.ports[p];
    const SimTime ready = std::max(port.xcvr.request_on(engine.now()), engine.now());
    engine.schedule(ready, EventKind::kLaserReady, sw.node, p);
    if (auto slot = timeline_slot[port.link]; slot != kNone) metrics.timeline->set(slot, engine.now(), true);
    return ready;
  }

  void owner_laser_off(std::uint32_t s, std::uint32_t stage) {
    Switch& sw = switches_[s];
    Port& port = sw.ports[sw.stage_ports[stage - 1]];
    port.xcvr.request_off(engine.now());
    if (auto slot = timeline_slot[port.link]; slot != kNone) metrics.timeline->set(slot, engine.now(), false);
  }

  void send_control(std::uint32_t s, ControlOpcode op, std::uint32_t stage, std::uint32_t sender) {
    Switch& sw = switches_[s];
    LcdcControlFrame f;
    f.dst_mac = mac_from_u64(kBroadcastMac);
    f.src_mac = mac_from_u64(topo.node(sw.node).mac);
    f.sender_id = sender;
    f.stage_id = LcdcControlFrame::pack_stage_id(op, static_cast<std::uint16_t>(stage));
    f.ttl = config.switches.control_ttl;
    const std::uint32_t pid = alloc_packet();
    Packet& pkt = packets[pid];
    pkt.control = true;
    pkt.bytes = kControlFrameSize;
    pkt.frame = encode_control(f);
    ++metrics.control_frames_sent;
    sw.arbiter->push_virtual(pid);
    kick_arbiter(s);
  }

  void flood(std::uint32_t s, std::uint32_t pid, std::uint32_t ingress_tag) {
    Switch& sw = switches_[s];
    PortMask out = sw.usable & sw.switch_facing;
    if (ingress_tag != 0) out.reset(ingress_tag - 1);
    std::vector<PortIndex> ports;
    for (auto p = out.find_first(); p != PortMask::npos; p = out.find_next(p)) {
      ports.push_back(static_cast<PortIndex>(p));
    }
    if (ports.empty()) {
      free_packet(pid);
      return;
    }
    for (std::size_t i = 1; i < ports.size(); ++i) {
      const std::uint32_t copy = alloc_packet();
      packets[copy] = packets[pid];
      enqueue(s, ports[i], copy, ingress_tag);
    }
    enqueue(s, ports.front(), pid, ingress_tag);
  }

  void handle_control(std::uint32_t s, std::uint32_t pid, std::uint32_t tag) {
    Switch& sw = switches_[s];
    if (tag == 0) {
      flood(s, pid, 0);
      return;
    }
    const auto decoded = decode_control(packets[pid].frame);
    if (decoded.status != DecodeStatus::kOk) {
      ++metrics.drops.control_unknown;
      free_packet(pid);
      return;
    }
    if (decoded.frame.sender_id == sw.node && !decoded.frame.is_ack()) {
      // Our own notification came back; it was flooded when generated.
      free_packet(pid);
      return;
    }
    const auto disp = process_control(decoded.frame, sw.node);
    if (disp.unknown_opcode) {
      ++metrics.drops.control_unknown;
      free_packet(pid);
      return;
    }
    if (disp.notify) apply_notification(s, decoded.frame);
    if (disp.forward) {
      packets[pid].frame = encode_control(disp.frame);
      flood(s, pid, tag);
    } else {
      free_packet(pid);
    }
  }

  void apply_notification(std::uint32_t s, const LcdcControlFrame& f) {
    Switch& sw = switches_[s];
    const std::uint32_t stage = f.stage();
    switch (f.opcode()) {
      case ControlOpcode::kAckEnable:
        if (sw.ctl) sw.ctl->on_ack_enable(stage, engine.now(), *sw.actions);
        return;
      case ControlOpcode::kAckDisable:
        if (sw.ctl) sw.ctl->on_ack_disable(stage, engine.now(), *sw.actions);
        return;
      case ControlOpcode::kEnable:
      case ControlOpcode::kDisable:
        break;
    }
    const bool enable = f.opcode() == ControlOpcode::kEnable;
    if (f.sender_id >= topo.nodes().size()) return;
    const Node& sender = topo.node(f.sender_id);
    if (sender.kind == NodeKind::kServer || stage < 1 || stage > sender.stage_uplinks.size()) return;
    if (sender.kind == NodeKind::kRsw && !sw.rsw_view.empty()) {
      auto& v = sw.rsw_view[sender.index];
      v = enable ? (v | (1u << stage)) : (v & ~(1u << stage));
    }
    const Link& l = topo.link(sender.stage_uplinks[stage - 1]);
    if (l.upper.node != sw.node) return;
    if (enable) {
      peer_enable(s, l.upper.port);
    } else {
      peer_disable(s, l.upper.port);
    }
  }

  void peer_enable(std::uint32_t s, PortIndex p) {
    Switch& sw = switches_[s];
    Port& port = sw.ports[p];
    if (port.peer_enabled) return;
    port.peer_enabled = true;
    port.peer_draining = false;
    port.pending_off = false;
    const SimTime ready = std::max(port.xcvr.request_on(engine.now()), engine.now());
    // The ack goes out once our laser is on (see on_laser_ready).
    engine.schedule(ready, EventKind::kLaserReady, sw.node, p);
  }

  void peer_disable(std::uint32_t s, PortIndex p) {
    Switch& sw = switches_[s];
    Port& port = sw.ports[p];
    if (!port.peer_enabled) return;
    port.peer_enabled = false;
    port.peer_acked = false;
    port.peer_draining = true;
    recompute_usable(sw, true);
    if (port_idle(port)) finish_peer_disable(s, p);
  }

  void finish_peer_disable(std::uint32_t s, PortIndex p) {
    Switch& sw = switches_[s];
    Port& port = sw.ports[p];
    port.peer_draining = false;
    const Link& l = topo.link(port.link);
    send_control(s, ControlOpcode::kAckDisable, l.stage_index, l.lower.node);
    if (port.xcvr.mode_at(engine.now()) == LaserMode::kOn) {
      port.xcvr.request_off(engine.now());
    } else {
      port.pending_off = true;
    }
  }

  void on_laser_ready(std::uint32_t s, PortIndex p) {
    Switch& sw = switches_[s];
    Port& port = sw.ports[p];
    if (port.xcvr.mode_at(engine.now()) != LaserMode::kOn) return;
    if (port.owner) {
      sw.ctl->on_laser_ready(port.stage, engine.now(), *sw.actions);
    } else if (port.pending_off) {
      port.pending_off = false;
      port.xcvr.request_off(engine.now());
    } else if (port.peer_enabled && !port.peer_acked) {
      port.peer_acked = true;
      const Link& l = topo.link(port.link);
      send_control(s, ControlOpcode::kAckEnable, l.stage_index, l.lower.node);
      recompute_usable(sw, true);
    }
    port_try_tx(s, p);
  }

  void stages_changed(std::uint32_t s) {
    Switch& sw = switches_[s];
    recompute_usable(sw, true);
    const SimTime until = sw.ctl->holddown_until();
    if (until > engine.now() && until != sw.recheck_at) {
      sw.recheck_at = until;
      engine.schedule(until, EventKind::kStageRecheck, sw.node);
    }
    if (hooks.on_stage_change) hooks.on_stage_change(engine.now(), sw.node, sw.ctl->active_stage());
  }

  bool port_usable(const Switch& sw, const Port& port) const {
    if (port.to_server || port.ring || port.stage == 0) return true;
    if (port.owner) return sw.ctl->status(port.stage) == StageStatus::kActive;
    return port.peer_enabled && port.xcvr.mode_at(engine.now()) == LaserMode::kOn;
  }

  void recompute_usable(Switch& sw, bool probe) {
    PortMask next(sw.ports.size());
    for (PortIndex p = 0; p < sw.ports.size(); ++p) {
      if (port_usable(sw, sw.ports[p])) next.set(p);
    }
    if (next == sw.usable) return;
    sw.usable = std::move(next);
    if (probe && config.run.connectivity_probe) probe_connectivity();
  }

  void probe_connectivity() {
    ++metrics.connectivity_probes;
    const bool ok = topo.fully_connected([this](const Link& l, NodeId from) {
      const std::uint32_t s = sw_of_node[from];
      if (s == kNone) return true;
      return switches_[s].usable.test(l.end_of(from).port);
    });
    if (!ok) ++metrics.connectivity_failures;
    if (hooks.on_probe) hooks.on_probe(engine.now(), ok);
  }

  // -------------------------------------------------------------- events

  void handle(const Event& ev) override {
    dispatch(ev);
    flush_resumes();
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::kFlowInjection:
        on_flow_injection(server_of_node[ev.target], lo32(ev.payload));
        break;
      case EventKind::kPacketsReady:
        on_packets_ready(server_of_node[ev.target], lo32(ev.payload));
        break;
      case EventKind::kNicTxDone:
        on_nic_tx_done(server_of_node[ev.target]);
        break;
      case EventKind::kNicIdleCheck:
        servers_[server_of_node[ev.target]].nic.nic_idle_check(engine.now());
        break;
      case EventKind::kPacketArrival:
        on_packet_arrival(sw_of_node[ev.target], lo32(ev.payload), hi32(ev.payload) - 1);
        break;
      case EventKind::kArbitrate:
        on_arbitrate(sw_of_node[ev.target]);
        break;
      case EventKind::kPipelineDone:
        on_pipeline_done(sw_of_node[ev.target], lo32(ev.payload), hi32(ev.payload));
        break;
      case EventKind::kPortTxDone:
        on_port_tx_done(sw_of_node[ev.target], lo32(ev.payload));
        break;
      case EventKind::kDelivery:
        on_delivery(lo32(ev.payload));
        break;
      case EventKind::kLaserReady:
        if (server_of_node[ev.target] != kNone) {
          nic_try_tx(server_of_node[ev.target]);
        } else {
          on_laser_ready(sw_of_node[ev.target], lo32(ev.payload));
        }
        break;
      case EventKind::kStageRecheck: {
        Switch& sw = switches_[sw_of_node[ev.target]];
        if (sw.recheck_at == engine.now()) sw.recheck_at = SimTime::max();
        evaluate(sw_of_node[ev.target]);
        break;
      }
      case EventKind::kTimer:
        break;
    }
  }

  RunMetrics run() {
    const SimTime end = config.run.duration;
    flow_state.resize(flows.size());
    metrics.flow_completion.assign(flows.size(), SimTime::max());
    for (std::uint32_t i = 0; i < flows.size(); ++i) {
      const FlowSpec& f = flows[i];
      if (f.src >= servers_.size() || f.dst >= servers_.size() || f.src == f.dst || f.size_bytes == 0) {
        throw std::invalid_argument("flow " + std::to_string(i) + " has invalid endpoints or size");
      }
      flow_state[i] = FlowState{f.arrival, f.src, f.dst, f.size_bytes, 0};
      if (f.arrival >= end) continue;
      engine.schedule(f.arrival, EventKind::kFlowInjection, servers_[f.src].node, i);
      ++metrics.flows_injected;
    }
    const auto summary = engine.run_until(end, *this);
    metrics.trace_hash = summary.trace_hash;
    metrics.events = summary.events_processed;
    metrics.packets_in_flight =
        metrics.packets_injected - metrics.packets_delivered - metrics.drops.total_data();
    for (auto& sw : switches_) {
      if (sw.ctl) {
        metrics.stage_activations += sw.ctl->activations();
        metrics.stage_deactivations += sw.ctl->deactivations();
      }
    }
    metrics.timeline->finish(end);
    build_ledger(end);
    return std::move(metrics);
  }

  void build_ledger(SimTime end) {
    auto& ledger = metrics.ledger;
    for (const Link& l : topo.links()) {
      for (const LinkEnd* e : {&l.lower, &l.upper}) {
        LedgerEntry entry;
        entry.link_id = l.id;
        entry.node_id = e->node;
        const std::uint32_t srv = server_of_node[e->node];
        if (srv != kNone) {
          entry.headline = true;
          entry.energy_j = servers_[srv].nic.laser().energy_in(SimTime{}, end);
        } else {
          entry.headline = l.gated();
          entry.energy_j = switches_[sw_of_node[e->node]].ports[e->port].xcvr.energy_in(SimTime{}, end);
        }
        ledger.push_back(entry);
      }
    }
    metrics.headline_energy_j = ledger_total(ledger, true);
    metrics.total_energy_j = ledger_total(ledger, false);
  }

  ScenarioConfig config;
  RunMode mode;
  bool gated = true;
  Topology topo;
  std::vector<FlowSpec> flows;
  SimulationHooks hooks;
  Engine engine;
  RunMetrics metrics;
  SimTime pipeline;
  SimTime cycle;

  std::vector<Switch> switches_;
  std::vector<Server> servers_;
  std::vector<std::uint32_t> sw_of_node;
  std::vector<std::uint32_t> server_of_node;
  std::vector<std::uint32_t> timeline_slot;
  std::vector<Packet> packets;
  std::vector<std::uint32_t> free_packets;
  std::vector<FlowState> flow_state;
  std::deque<std::pair<NodeId, std::uint32_t>> pending_resume;
};

Simulation::Simulation(const ScenarioConfig& config, RunMode mode, std::vector<FlowSpec> flows,
                       SimulationHooks hooks)
    : impl_(std::make_unique<Impl>(config, mode, std::move(flows), std::move(hooks))) {}

Simulation::~Simulation() = default;

RunMetrics Simulation::run() { return impl_->run(); }

const Topology& Simulation::topology() const { return impl_->topo; }

std::vector<FlowSpec> build_workload(const ScenarioConfig& config, const Topology& topo) {
  const auto n = static_cast<std::uint32_t>(topo.servers().size());
  std::vector<FlowSpec> flows;
  if (!config.workload.trace.empty()) {
    flows = load_trace(config.workload.trace, n).flows;
  } else {
    const std::filesystem::path data =
        config.workload.data_dir.empty() ? default_data_dir() : std::filesystem::path(config.workload.data_dir);
    WorkloadProfile profile = load_profile(config.workload.profile, data);
    if (config.workload.locality) profile.locality = *config.workload.locality;
    const double scale = interval_scale_for_load(profile, config.workload.load, config.site.server_link_bps);
    TrafficRng rng(config.run.seed);
    flows = generate(profile, topo, config.run.duration, rng, scale);
  }
  std::erase_if(flows, [&](const FlowSpec& f) { return f.arrival >= config.run.duration; });
  for (std::uint32_t i = 0; i < flows.size(); ++i) flows[i].id = i;
  return flows;
}

RunMetrics run_scenario(const ScenarioConfig& config, RunMode mode, SimulationHooks hooks) {
  config.validate();
  const Topology topo = build_site(config.site);
  auto flows = build_workload(config, topo);
  Simulation sim(config, mode, std::move(flows), std::move(hooks));
  return sim.run();
}

}  // namespace lcdc
