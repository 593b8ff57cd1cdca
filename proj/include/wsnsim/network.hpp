#pragma once

// Full-stack network simulation: nodes with mobility, adaptive beaconing,
// CSMA/CA over a two-ray channel, per-node energy ledgers, round-based
// cluster-head election with TDMA member slots, relaying between cluster
// heads and on-demand route discovery.

#include "clustering.hpp"
#include "energy.hpp"
#include "frame.hpp"
#include "mac.hpp"
#include "metrics.hpp"
#include "mobility.hpp"
#include "radio.hpp"
#include "routing.hpp"
#include "scenario.hpp"
#include "sim_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace wsnsim {

enum class EvKind : std::uint8_t {
  MobilityTick,
  Housekeeping,
  InitialBeacon,
  MepCheck,
  PeriodicBeacon,
  MacBackoffEnd,
  MacAckTimeout,
  AiringEnd,
  AckSend,
  Generate,
  RoundStart,
  ElectionTimer,
  JoinPhase,
  JoinSend,
  SchedulePhase,
  ScheduleDeadline,
  SlotStart,
  SleepCheck,
  RreqTimeout,
  RrepWindowEnd,
  RreqForward,
  ThroughputSample,
  JamStart,
  JamEnd,
  Discover,
};

inline const char* to_string(EvKind k) noexcept {
  static constexpr const char* names[] = {
      "mobility",  "housekeeping",  "init_beacon", "mep_check",   "periodic_beacon",
      "backoff",   "ack_timeout",   "airing_end",  "ack_send",    "generate",
      "round",     "elect_timer",   "join_phase",  "join_send",   "sched_phase", "sched_deadline",
      "slot",      "sleep_check",   "rreq_timeout", "rrep_window", "rreq_forward",
      "tput_sample", "jam_start",   "jam_end",     "discover"};
  return names[static_cast<std::size_t>(k)];
}

struct EvPayload {
  EvKind kind = EvKind::Housekeeping;
  NodeId node = kNoNode;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

enum class Role : std::uint8_t {
  Undecided,    // election timer running
  ClusterHead,
  Suppressed,   // heard an advertisement, not yet joined
  Joining,      // JOIN sent, awaiting SCHEDULE
  Member,
  Unclustered,
};

inline const char* to_string(Role r) noexcept {
  switch (r) {
    case Role::Undecided: return "undecided";
    case Role::ClusterHead: return "ch";
    case Role::Suppressed: return "suppressed";
    case Role::Joining: return "joining";
    case Role::Member: return "member";
    case Role::Unclustered: return "unclustered";
  }
  return "?";
}

// Explicit placement for scripted scenarios. Positions are for sensor nodes
// 1..N in order; the sink is always node 0.
struct Deployment {
  std::vector<Position> positions;
  bool all_static = false;
};

struct NetworkStats {
  std::uint64_t beacons_sent = 0;
  std::uint64_t rreq_sent = 0;       // originated + forwarded
  std::uint64_t rreq_originated = 0;
  std::uint64_t rrep_sent = 0;
  std::uint32_t ch_rounds = 0;
  std::uint64_t unclustered = 0;     // node-rounds that ended without a cluster
  std::uint64_t loop_drops = 0;
  std::uint64_t hop_violations = 0;  // forwarded to a non-neighbour
  std::uint64_t busy_start_violations = 0;
  std::uint64_t deaths = 0;
  std::array<std::uint64_t, 8> airings_by_kind{};
};

class Network {
 public:
  static constexpr std::uint32_t kMacHeaderBytes = 9;
  static constexpr NodeId kSink = 0;
  static constexpr double kRoundOffset = 1.0;
  static constexpr double kInitialBeaconSpread = 0.5;
  static constexpr double kJoinWindow = 0.5;
  static constexpr double kJoinSpread = 0.3;
  static constexpr double kScheduleGuard = 0.1;
  static constexpr double kHousekeeping = 1.0;
  static constexpr double kSamplePeriod = 5.0;
  static constexpr double kDrainCap = 30.0;

  struct Discovery {
    bool active = false;
    int attempt = 0;
    std::uint64_t token = 0;
    bool window_open = false;
    std::deque<std::uint64_t> buffered;
    std::vector<RouteEntry> candidates;
  };

  struct Incoming {
    std::uint64_t tx = 0;
    double power = 0.0;
    bool corrupted = false;
  };

  struct SlotPlan {
    bool valid = false;
    SimTime frame_start = 0.0;
    double slot_len = 0.0;
    std::size_t n_slots = 0;
    std::size_t index = 0;
  };

  struct Node {
    NodeId id = kNoNode;
    bool is_sink = false;
    Position pos;
    WaypointState wp;
    bool mobile = false;
    BeaconTrigger beacon;
    EnergyLedger ledger;
    SimTime state_since = 0.0;
    bool asleep = false;
    bool dead = false;
    bool rx_enabled = true;
    std::unique_ptr<CsmaMac<Network>> mac;
    NeighborTable nbrs;
    RouteTable routes;
    RreqCache rreq_cache;
    std::uint32_t rreq_id = 0;
    std::uint32_t seq = 0;
    std::map<std::pair<NodeId, std::uint32_t>, int> rrep_answers;
    std::map<NodeId, std::uint32_t> want_seq;  // per destination, raised on breaks

    std::vector<Incoming> incoming;
    int airing = 0;
    bool ack_pending = false;
    std::map<NodeId, std::uint32_t> last_seq_from;

    std::map<NodeId, Discovery> discovery;

    Role role = Role::Unclustered;
    bool settled = true;
    std::uint32_t round = 0;
    std::uint64_t election_token = 0;
    double vr = 0.0;
    bool adv_queued = false;
    std::vector<HeardHead> heard_heads;
    NodeId ch = kNoNode;
    NodeId prev_ch = kNoNode;  // head of the previous round, while re-electing
    std::vector<NodeId> joined;
    NodeId relay_next = kNoNode;
    SlotPlan slot;
    std::uint64_t slot_token = 0;
    bool slot_pending = false;
    std::deque<std::uint64_t> uplink;
    std::uint64_t sleep_token = 0;
    SimTime relay_until = 0.0;
    std::uint64_t beacons = 0;
  };

  Network(Scenario scenario, std::optional<Deployment> deployment = std::nullopt)
      : sc_(std::move(scenario)), rng_(sc_.seed), grid_(sc_.region, sc_.radio.range_m) {
    sc_.mobility.validate();
    sc_.mac.validate();
    sc_.energy.validate();
    sc_.route.validate();
    validate(sc_);
    radio_ = calibrate(sc_.radio);
    sink_pos_ = sc_.sink_position();
    election_ = sc_.cluster;
    election_.d_min = 0.0;
    election_.d_max = 0.0;
    for (const Position corner : {Position{0, 0}, Position{sc_.region.side, 0},
                                  Position{0, sc_.region.side},
                                  Position{sc_.region.side, sc_.region.side}}) {
      election_.d_max = std::max(election_.d_max, distance(corner, sink_pos_));
    }
    election_.validate();
    build_nodes(deployment);
    build_traffic();
  }

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  void set_trace(std::ostream* out) { trace_ = out; }

  // Scripted-scenario hooks; call before run().
  void set_receiver_enabled(NodeId id, bool enabled) { nodes_.at(id).rx_enabled = enabled; }
  void set_waypoint(NodeId id, Position dest, double speed) {
    Node& n = nodes_.at(id);
    n.wp.destination = dest;
    n.wp.speed = speed;
    n.mobile = speed > 0.0;
  }
  void add_jammer(Position pos, SimTime start, SimTime stop) {
    jammers_.push_back({pos, start, stop});
  }
  void inject_data(NodeId src, SimTime at) { injected_.push_back({at, src}); }
  void set_initial_energy(NodeId id, double e0_j) { nodes_.at(id).ledger.e0 = e0_j; }
  // Starts a route discovery from `origin` toward an arbitrary node.
  void discover(NodeId origin, NodeId dest, SimTime at) { discoveries_.push_back({at, origin, dest}); }

  // Runs to the horizon, snapshots energy, then lets in-flight packets
  // settle (no new traffic) so every packet has exactly one fate.
  MetricsTable run() {
    if (ran_) throw ConfigError("Network::run called twice");
    ran_ = true;
    seed_events();
    sched_.run_until(sc_.sim_time_s, [this](const Event<EvPayload>& ev) { dispatch(ev); });
    for (auto& n : nodes_) settle(n);
    snapshot_ = {};
    for (const auto& n : nodes_) {
      if (!n.is_sink) snapshot_.push_back(n.ledger);
    }
    horizon_done_ = true;
    const SimTime cap = sc_.sim_time_s + kDrainCap;
    while (unresolved_ > 0 && sched_.now() < cap) {
      sched_.run_until(std::min(cap, sched_.now() + 1.0),
                       [this](const Event<EvPayload>& ev) { dispatch(ev); });
    }
    force_resolve();
    return metrics();
  }

  // Accessors for tests and reporting.
  const Scenario& scenario() const noexcept { return sc_; }
  const RadioParams& radio() const noexcept { return radio_; }
  const Grid& grid() const noexcept { return grid_; }
  const ElectionParams& election() const noexcept { return election_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<PacketRecord>& packets() const noexcept { return packets_; }
  const std::vector<EnergyLedger>& energy_snapshot() const noexcept { return snapshot_; }
  const NetworkStats& stats() const noexcept { return stats_; }
  const std::vector<ThroughputSample>& throughput_samples() const noexcept { return samples_; }
  const std::vector<NodeId>& sources() const noexcept { return cbr_.sources; }
  const CbrConfig& cbr() const noexcept { return cbr_; }
  std::uint64_t event_hash() const noexcept { return hash_; }
  std::uint64_t events_dispatched() const noexcept { return sched_.dispatched(); }
  SimTime now() const noexcept { return sched_.now(); }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  ClusterPlan cluster_plan() const {
    ClusterPlan plan;
    for (const auto& n : nodes_) {
      if (n.is_sink || n.dead) continue;
      switch (n.role) {
        case Role::ClusterHead:
          plan.ch_of_cell[grid_.flat_of(n.pos)].push_back(n.id);
          if (n.relay_next != kNoNode) plan.relay_next[n.id] = n.relay_next;
          plan.schedule[n.id] =
              build_schedule(n.joined, n.slot.valid ? n.slot.frame_start : 0.0, election_.slot_s);
          break;
        case Role::Member: plan.members[n.id] = n.ch; break;
        default: plan.unclustered.push_back(n.id); break;
      }
    }
    return plan;
  }

  // --- CsmaMac host interface ----------------------------------------------

  SimTime now_for_mac() const noexcept { return sched_.now(); }

  void mac_schedule(NodeId self, SimTime delay, MacTimer timer, std::uint64_t token) {
    schedule_in(delay, timer == MacTimer::BackoffEnd ? EvKind::MacBackoffEnd
                                                     : EvKind::MacAckTimeout,
                self, token);
  }

  bool mac_channel_busy(NodeId self) const {
    const Node& n = nodes_[self];
    return !n.incoming.empty() || n.airing > 0 || n.ack_pending;
  }

  void mac_begin_airing(NodeId self, const Frame& frame) {
    if (mac_channel_busy(self)) ++stats_.busy_start_violations;
    begin_airing(self, frame, false);
  }

  RngStream& mac_backoff_rng() noexcept { return rng_.backoff; }

  void mac_frame_done(NodeId self, const Frame& frame, MacOutcome outcome) {
    Node& n = nodes_[self];
    if (outcome != MacOutcome::Sent) {
      trace_line("fail", self, frame, outcome == MacOutcome::ChannelAccessFailure ? "csma" : "retry");
    }
    switch (frame.kind) {
      case FrameKind::Data: {
        const auto& d = std::get<DataPayload>(frame.payload);
        if (outcome == MacOutcome::ChannelAccessFailure) {
          drop(d.pkt_id, DropReason::Csma);
        } else if (outcome == MacOutcome::RetryExhausted) {
          drop(d.pkt_id, DropReason::Retry);
          on_link_break(n, frame.dst);
        }
        break;
      }
      case FrameKind::AdvCh:
        n.adv_queued = false;
        break;
      case FrameKind::Join:
        if (outcome != MacOutcome::Sent && n.role == Role::Joining) become_unclustered(n);
        break;
      case FrameKind::Rrep:
        if (outcome == MacOutcome::RetryExhausted) on_link_break(n, frame.dst);
        break;
      default: break;
    }
    touch(n);
  }

  void mac_queue_drop(NodeId, const Frame& frame) {
    if (frame.kind == FrameKind::Data) {
      drop(std::get<DataPayload>(frame.payload).pkt_id, DropReason::Queue);
    }
  }

 private:
  struct Transmission {
    NodeId src = kNoNode;
    Frame frame;
    bool is_ack = false;
    std::vector<NodeId> reached;
  };

  struct ScriptedDiscovery {
    SimTime at = 0.0;
    NodeId origin = kNoNode;
    NodeId dest = kNoNode;
  };

  struct Jammer {
    Position pos;
    SimTime start = 0.0;
    SimTime stop = 0.0;
  };

  // --- setup ---------------------------------------------------------------

  void build_nodes(const std::optional<Deployment>& dep) {
    const std::uint32_t total = sc_.nodes + 1;
    nodes_.resize(total);
    const bool any_motion = sc_.mobility.v_max > 0.0 && !(dep && dep->all_static);
    for (NodeId id = 0; id < total; ++id) {
      Node& n = nodes_[id];
      n.id = id;
      n.is_sink = id == kSink;
      n.ledger = EnergyLedger::from(sc_.energy);
      n.beacon = BeaconTrigger(sc_.mep);
      n.nbrs = NeighborTable(sc_.route.neighbor_ttl_s);
      n.mac = std::make_unique<CsmaMac<Network>>(id, sc_.mac, *this);
      n.settled = true;
      n.role = Role::Unclustered;
      if (n.is_sink) {
        n.pos = sink_pos_;
        continue;
      }
      if (dep && id - 1 < dep->positions.size()) {
        n.pos = sc_.region.clamp(dep->positions[id - 1]);
      } else {
        n.pos = {rng_.placement.uniform(0.0, sc_.region.side),
                 rng_.placement.uniform(0.0, sc_.region.side)};
      }
      if (any_motion) {
        n.wp = draw_waypoint(sc_.region, sc_.mobility, rng_.mobility);
        n.mobile = n.wp.speed > 0.0;
      }
    }
  }

  void build_traffic() {
    std::vector<NodeId> ids;
    for (NodeId id = 1; id <= sc_.nodes; ++id) ids.push_back(id);
    // Fisher-Yates on the traffic stream.
    for (std::size_t i = ids.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng_.traffic.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(ids[i - 1], ids[j]);
    }
    ids.resize(std::min<std::size_t>(ids.size(), sc_.traffic.sources));
    std::sort(ids.begin(), ids.end());
    cbr_.sources = ids;
    cbr_.packet_bytes = kDataBytes;
    cbr_.start_t = sc_.traffic.start_s;
    cbr_.stop_t = std::min(sc_.traffic.stop_s, sc_.sim_time_s);
    if (!ids.empty()) {
      cbr_.offered_load_bps = sc_.traffic.load_bps / static_cast<double>(ids.size());
      emissions_ = generate_cbr(cbr_, rng_.traffic);
    }
  }

  void seed_events() {
    for (const auto& e : emissions_) schedule(e.at, EvKind::Generate, e.src);
    for (const auto& e : injected_) schedule(e.at, EvKind::Generate, e.src);
    for (const auto& d : discoveries_) schedule(d.at, EvKind::Discover, d.origin, d.dest);
    for (std::size_t i = 0; i < jammers_.size(); ++i) {
      schedule(jammers_[i].start, EvKind::JamStart, kNoNode, i);
    }
    for (auto& n : nodes_) {
      if (n.is_sink) continue;
      schedule(rng_.jitter.uniform(0.0, kInitialBeaconSpread), EvKind::InitialBeacon, n.id);
    }
    bool any_mobile = false;
    for (const auto& n : nodes_) any_mobile = any_mobile || n.mobile;
    if (any_mobile) schedule(sc_.mobility_step_s, EvKind::MobilityTick);
    schedule(kHousekeeping, EvKind::Housekeeping);
    schedule(kSamplePeriod, EvKind::ThroughputSample);
    if (sc_.mode != Mode::AodvOnly) schedule(kRoundOffset, EvKind::RoundStart, kNoNode, 0);
  }

  // --- event plumbing --------------------------------------------------------

  void schedule(SimTime at, EvKind kind, NodeId node = kNoNode, std::uint64_t a = 0,
                std::uint64_t b = 0) {
    sched_.schedule(at, EvPayload{kind, node, a, b});
  }

  void schedule_in(SimTime delay, EvKind kind, NodeId node = kNoNode, std::uint64_t a = 0,
                   std::uint64_t b = 0) {
    sched_.schedule_in(delay, EvPayload{kind, node, a, b});
  }

  void mix(std::uint64_t v) noexcept {
    hash_ ^= v;
    hash_ *= 0x100000001B3ULL;
  }

  void dispatch(const Event<EvPayload>& ev) {
    const EvPayload& p = ev.payload;
    std::uint64_t tbits;
    static_assert(sizeof tbits == sizeof ev.fire_time);
    std::memcpy(&tbits, &ev.fire_time, sizeof tbits);
    mix(tbits);
    mix(ev.seq);
    mix(static_cast<std::uint64_t>(p.kind));
    mix(p.node);
    mix(p.a);
    mix(p.b);
    if (trace_) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%.9f %llu %s %lld %llu %llu\n", ev.fire_time,
                    static_cast<unsigned long long>(ev.seq), to_string(p.kind),
                    p.node == kNoNode ? -1LL : static_cast<long long>(p.node),
                    static_cast<unsigned long long>(p.a), static_cast<unsigned long long>(p.b));
      *trace_ << buf;
    }

    switch (p.kind) {
      case EvKind::MobilityTick: on_mobility_tick(); break;
      case EvKind::Housekeeping: on_housekeeping(); break;
      case EvKind::InitialBeacon: on_initial_beacon(nodes_[p.node]); break;
      case EvKind::MepCheck: on_mep_check(nodes_[p.node]); break;
      case EvKind::PeriodicBeacon: on_periodic_beacon(nodes_[p.node]); break;
      case EvKind::MacBackoffEnd:
        if (!nodes_[p.node].dead) nodes_[p.node].mac->on_timer(MacTimer::BackoffEnd, p.a);
        break;
      case EvKind::MacAckTimeout:
        if (!nodes_[p.node].dead) nodes_[p.node].mac->on_timer(MacTimer::AckTimeout, p.a);
        break;
      case EvKind::AiringEnd: on_airing_end(p.a); break;
      case EvKind::AckSend: on_ack_send(nodes_[p.node], static_cast<NodeId>(p.a),
                                        static_cast<std::uint32_t>(p.b)); break;
      case EvKind::Generate: on_generate(p.node); break;
      case EvKind::RoundStart: on_round_start(static_cast<std::uint32_t>(p.a)); break;
      case EvKind::ElectionTimer: on_election_timer(nodes_[p.node], p.a); break;
      case EvKind::JoinPhase: on_join_phase(static_cast<std::uint32_t>(p.a)); break;
      case EvKind::JoinSend: on_join_send(nodes_[p.node], static_cast<std::uint32_t>(p.a)); break;
      case EvKind::SchedulePhase: on_schedule_phase(static_cast<std::uint32_t>(p.a)); break;
      case EvKind::ScheduleDeadline: on_schedule_deadline(static_cast<std::uint32_t>(p.a)); break;
      case EvKind::SlotStart: on_slot_start(nodes_[p.node], p.a); break;
      case EvKind::SleepCheck: on_sleep_check(nodes_[p.node], p.a); break;
      case EvKind::RreqTimeout: on_rreq_timeout(nodes_[p.node], static_cast<NodeId>(p.a), p.b); break;
      case EvKind::RrepWindowEnd: on_rrep_window_end(nodes_[p.node], static_cast<NodeId>(p.a), p.b); break;
      case EvKind::RreqForward: on_rreq_forward(nodes_[p.node], p.a); break;
      case EvKind::ThroughputSample: on_throughput_sample(); break;
      case EvKind::JamStart: on_jam_start(p.a); break;
      case EvKind::JamEnd: on_jam_end(p.a); break;
      case EvKind::Discover: on_discover(nodes_[p.node], static_cast<NodeId>(p.a)); break;
    }
  }

  void trace_line(const char* what, NodeId node, const Frame& f, const char* extra = "") {
    if (!trace_) return;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.9f - %s %u %s %lld %u %s\n", sched_.now(), what, node,
                  std::string(to_string(f.kind)).c_str(),
                  f.dst == kBroadcast ? -1LL : static_cast<long long>(f.dst), f.mac_seq, extra);
    *trace_ << buf;
  }

  // --- energy and power state --------------------------------------------------

  void settle(Node& n) {
    const SimTime now = sched_.now();
    if (n.dead) {
      n.state_since = now;
      return;
    }
    accrue_state(n.ledger, n.asleep ? RadioState::Sleep : RadioState::Idle, now - n.state_since);
    n.state_since = now;
    if (n.ledger.dead) kill(n);
  }

  bool charge(Node& n, Direction dir, std::uint32_t bytes, double dist) {
    settle(n);
    if (n.dead) return false;
    const double packets = static_cast<double>(bytes) / static_cast<double>(kDataBytes);
    const bool ok = charge_packet(n.ledger, dir, std::max(dist, 1e-3), packets);
    if (n.ledger.dead) kill(n);
    return ok;
  }

  void kill(Node& n) {
    if (n.dead) return;
    n.dead = true;
    n.ledger.dead = true;
    ++stats_.deaths;
    if (trace_) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9f - dead %u\n", sched_.now(), n.id);
      *trace_ << buf;
    }
    for (auto& f : n.mac->shut_down()) {
      if (f.kind == FrameKind::Data) drop(std::get<DataPayload>(f.payload).pkt_id, DropReason::Dead);
    }
    for (auto pkt : n.uplink) drop(pkt, DropReason::Dead);
    n.uplink.clear();
    for (auto& [dest, d] : n.discovery) {
      for (auto pkt : d.buffered) drop(pkt, DropReason::Dead);
      d = Discovery{};
    }
    n.incoming.clear();
    ++n.election_token;
    ++n.slot_token;
    ++n.sleep_token;
    n.relay_next = kNoNode;
  }

  void wake(Node& n) {
    if (!n.asleep || n.dead) return;
    settle(n);
    n.asleep = false;
    n.ledger.state = RadioState::Idle;
  }

  bool can_sleep(const Node& n) const {
    return sc_.mode != Mode::AodvOnly && !n.is_sink && !n.dead && !n.asleep &&
           n.role == Role::Member && n.settled && n.mac->idle() && !n.ack_pending &&
           n.airing == 0 && n.uplink.empty() && !discovering(n) &&
           sched_.now() >= n.relay_until;
  }

  // A node carrying someone else's traffic stays awake while that route is
  // considered active.
  void mark_relaying(Node& n) {
    n.relay_until = sched_.now() + sc_.route.active_route_s;
    touch(n);
  }

  static bool discovering(const Node& n) {
    for (const auto& [dest, d] : n.discovery) {
      if (d.active) return true;
    }
    return false;
  }

  // Records activity; members fall asleep after a quiet sleep_after period.
  void touch(Node& n) {
    if (n.is_sink || n.dead || n.role != Role::Member) return;
    const SimTime at = std::max(sched_.now() + sc_.energy.sleep_after_s, n.relay_until);
    schedule(at, EvKind::SleepCheck, n.id, ++n.sleep_token);
  }

  void on_sleep_check(Node& n, std::uint64_t token) {
    if (token != n.sleep_token || !can_sleep(n)) return;
    settle(n);
    if (n.dead) return;
    n.asleep = true;
    n.ledger.state = RadioState::Sleep;
    n.incoming.clear();
  }

  // --- channel -------------------------------------------------------------------

  double rx_power(const Position& a, const Position& b) const {
    return received_power(radio_, std::max(distance(a, b), 1e-3));
  }

  void begin_airing(NodeId src, Frame frame, bool is_ack) {
    Node& s = nodes_[src];
    wake(s);
    const double dist = frame.broadcast() ? sc_.radio.range_m
                                          : distance(s.pos, nodes_[frame.dst].pos);
    if (!charge(s, Direction::Tx, frame.size, dist)) return;
    frame.sender_pos = s.pos;
    frame.sender_energy = remaining(s.ledger);
    ++stats_.airings_by_kind[static_cast<std::size_t>(frame.kind)];
    trace_line("tx", src, frame);

    const std::uint64_t id = next_tx_++;
    Transmission tx{src, std::move(frame), is_ack, {}};
    ++s.airing;
    for (auto& in : s.incoming) in.corrupted = true;  // half duplex
    radiate(tx, s.pos, src);
    const double dur = airtime(tx.frame, sc_.mac);
    active_.emplace(id, std::move(tx));
    schedule_in(dur, EvKind::AiringEnd, src, id);
  }

  void radiate(Transmission& tx, const Position& from, NodeId src) {
    for (auto& r : nodes_) {
      if (r.id == src || r.dead || r.asleep) continue;
      const double p = rx_power(from, r.pos);
      if (p < radio_.cs_thresh) continue;
      const bool collided = !r.incoming.empty() || r.airing > 0;
      for (auto& in : r.incoming) in.corrupted = true;
      r.incoming.push_back({next_tx_ - 1, p, collided});
      tx.reached.push_back(r.id);
    }
  }

  void on_airing_end(std::uint64_t id) {
    auto it = active_.find(id);
    if (it == active_.end()) return;
    Transmission tx = std::move(it->second);
    active_.erase(it);
    for (NodeId rid : tx.reached) {
      Node& r = nodes_[rid];
      auto in = std::find_if(r.incoming.begin(), r.incoming.end(),
                             [id](const Incoming& x) { return x.tx == id; });
      if (in == r.incoming.end()) continue;  // slept or died meanwhile
      const Incoming sig = *in;
      r.incoming.erase(in);
      if (r.dead || r.asleep || !r.rx_enabled || sig.corrupted || sig.power < radio_.rx_thresh) {
        continue;
      }
      if (tx.src != kNoNode) deliver(r, tx.frame);
    }
    if (tx.src == kNoNode) return;
    Node& s = nodes_[tx.src];
    --s.airing;
    if (!tx.is_ack && !s.dead) s.mac->on_airing_end();
  }

  void on_ack_send(Node& n, NodeId to, std::uint32_t mac_seq) {
    n.ack_pending = false;
    if (n.dead) return;
    Frame ack = make_frame(FrameKind::Ack, n.id, to, sched_.now());
    ack.mac_seq = mac_seq;
    begin_airing(n.id, std::move(ack), true);
    touch(n);
  }

  void on_jam_start(std::uint64_t idx) {
    const Jammer& j = jammers_[idx];
    const std::uint64_t id = next_tx_++;
    Transmission tx;
    tx.src = kNoNode;
    tx.frame = make_frame(FrameKind::Data, kNoNode, kBroadcast, sched_.now());
    radiate(tx, j.pos, kNoNode);
    active_.emplace(id, std::move(tx));
    schedule(std::max(j.stop, sched_.now()), EvKind::JamEnd, kNoNode, id);
  }

  void on_jam_end(std::uint64_t id) { on_airing_end(id); }

  // --- reception -------------------------------------------------------------------

  void deliver(Node& r, const Frame& f) {
    // Address recognition ends reception of someone else's unicast after the
    // MAC header; listening time itself is already billed as idle.
    const bool for_me = f.broadcast() || f.dst == r.id;
    if (!charge(r, Direction::Rx, for_me ? f.size : std::min(f.size, kMacHeaderBytes), 0.0)) return;
    if (f.kind == FrameKind::Ack) {
      if (f.dst == r.id) r.mac->on_ack(f.src, f.mac_seq);
      return;
    }
    r.nbrs.update(f.src, f.sender_pos, f.sender_energy, sched_.now());
    if (!f.broadcast()) {
      if (f.dst != r.id) return;  // overheard
      r.ack_pending = true;
      schedule_in(sc_.mac.turnaround_s, EvKind::AckSend, r.id, f.src, f.mac_seq);
      auto [it, fresh] = r.last_seq_from.try_emplace(f.src, f.mac_seq);
      if (!fresh) {
        if (it->second == f.mac_seq) return;  // retransmission of a frame already taken
        it->second = f.mac_seq;
      }
    }
    switch (f.kind) {
      case FrameKind::Data: on_data(r, f); break;
      case FrameKind::Rreq: on_rreq(r, f); break;
      case FrameKind::Rrep: on_rrep(r, f); break;
      case FrameKind::AdvCh: on_adv(r, f); break;
      case FrameKind::Join: on_join(r, f); break;
      case FrameKind::Schedule: on_schedule(r, f); break;
      default: break;
    }
  }

  void enqueue(Node& n, Frame f) {
    if (n.dead) {
      if (f.kind == FrameKind::Data) drop(std::get<DataPayload>(f.payload).pkt_id, DropReason::Dead);
      return;
    }
    wake(n);
    n.mac->enqueue(std::move(f));
  }

  // --- mobility and beaconing --------------------------------------------------------

  void on_mobility_tick() {
    for (auto& n : nodes_) {
      if (n.mobile && !n.dead && !n.is_sink) {
        step_waypoint(n.pos, n.wp, sc_.mobility_step_s, sc_.region, sc_.mobility, rng_.mobility);
      }
    }
    schedule_in(sc_.mobility_step_s, EvKind::MobilityTick);
  }

  void send_beacon(Node& n) {
    ++stats_.beacons_sent;
    ++n.beacons;
    enqueue(n, make_frame(FrameKind::Beacon, n.id, kBroadcast, sched_.now()));
  }

  void on_initial_beacon(Node& n) {
    if (n.dead) return;
    n.beacon.start(n.pos, sched_.now());
    send_beacon(n);
    if (sc_.beaconing == Beaconing::Adaptive) {
      schedule_in(sc_.mep.check_interval_s, EvKind::MepCheck, n.id);
    } else {
      schedule_in(sc_.beacon_period_s, EvKind::PeriodicBeacon, n.id);
    }
  }

  void on_mep_check(Node& n) {
    if (n.dead) return;
    if (n.beacon.should_beacon(n.pos, sched_.now())) send_beacon(n);
    schedule_in(sc_.mep.check_interval_s, EvKind::MepCheck, n.id);
  }

  void on_periodic_beacon(Node& n) {
    if (n.dead) return;
    send_beacon(n);
    schedule_in(sc_.beacon_period_s, EvKind::PeriodicBeacon, n.id);
  }

  void on_housekeeping() {
    for (auto& n : nodes_) {
      settle(n);
      if (n.dead) continue;
      for (NodeId gone : n.nbrs.expire(sched_.now())) on_link_break(n, gone);
    }
    schedule_in(kHousekeeping, EvKind::Housekeeping);
  }

  void on_throughput_sample() {
    if (horizon_done_) return;
    const SimTime now = sched_.now();
    samples_.push_back({now, delivered_bits_ / now / 1000.0});
    if (now + kSamplePeriod <= sc_.sim_time_s + 1e-9) schedule_in(kSamplePeriod, EvKind::ThroughputSample);
  }

  // --- packets -------------------------------------------------------------------------

  void on_generate(NodeId src) {
    if (horizon_done_) return;
    PacketRecord rec;
    rec.id = packets_.size();
    rec.src = src;
    rec.generated_at = sched_.now();
    rec.size = kDataBytes;
    rec.path.push_back(src);
    packets_.push_back(std::move(rec));
    on_route_.push_back(0);
    ++unresolved_;
    Node& n = nodes_[src];
    if (n.dead) {
      drop(packets_.back().id, DropReason::Dead);
      return;
    }
    app_send(n, packets_.back().id);
  }

  void app_send(Node& n, std::uint64_t pkt) {
    if (sc_.mode == Mode::AodvOnly) {
      route_data(n, pkt);
      return;
    }
    if (!n.settled) {
      // Until the new round settles, last round's affiliation carries data.
      if (n.prev_ch != kNoNode && usable_next_hop(n, n.prev_ch)) {
        forward_to(n, pkt, n.prev_ch);
        return;
      }
      if (n.prev_ch == kNoNode) {
        route_data(n, pkt);
        return;
      }
    }
    if (!n.settled || n.role == Role::Member) {
      if (n.uplink.size() >= sc_.route.buffer_pkts) {
        drop(pkt, DropReason::Buffer);
        return;
      }
      n.uplink.push_back(pkt);
      arm_slot(n);
      return;
    }
    route_data(n, pkt);
  }

  // A next hop is usable while it is a live neighbour whose last advertised
  // position is still within radio range.
  bool usable_next_hop(const Node& n, NodeId hop) const {
    if (hop == kNoNode || nodes_[hop].dead) return false;
    if (hop == kSink) return distance(n.pos, sink_pos_) <= sc_.radio.range_m;
    if (!n.nbrs.live(hop, sched_.now())) return false;
    return distance(n.pos, n.nbrs.find(hop)->pos) <= sc_.radio.range_m;
  }

  // The relay chain must keep making progress toward the sink; mobility can
  // invalidate a choice made at the start of the round.
  bool usable_relay(const Node& n, NodeId hop) const {
    if (!usable_next_hop(n, hop)) return false;
    if (hop == kSink) return true;
    return distance(n.nbrs.find(hop)->pos, sink_pos_) < distance(n.pos, sink_pos_);
  }

  // Moves a packet held by `n` one hop closer to the sink.
  void route_data(Node& n, std::uint64_t pkt) {
    if (n.dead) {
      drop(pkt, DropReason::Dead);
      return;
    }
    if (distance(n.pos, sink_pos_) <= sc_.radio.range_m) {
      forward_to(n, pkt, kSink);
      return;
    }
    // Once a packet leaves the relay chain for a discovered route it stays on
    // discovered routes; mixing the two per hop can send it back uphill.
    if (sc_.mode != Mode::AodvOnly && n.relay_next != kNoNode && !on_route_[pkt]) {
      if (usable_relay(n, n.relay_next)) {
        forward_to(n, pkt, n.relay_next);
        return;
      }
      n.relay_next = kNoNode;
    }
    if (sc_.mode == Mode::ClusterOnly) {
      drop(pkt, DropReason::Buffer);
      return;
    }
    if (auto route = n.routes.lookup(kSink, sched_.now())) {
      if (usable_next_hop(n, route->next_hop)) {
        n.routes.refresh(kSink, sched_.now() + sc_.route.active_route_s);
        on_route_[pkt] = 1;
        forward_to(n, pkt, route->next_hop);
        return;
      }
      on_link_break(n, route->next_hop);
    }
    on_route_[pkt] = 1;
    buffer_and_discover(n, pkt, kSink);
  }

  void forward_to(Node& n, std::uint64_t pkt, NodeId next) {
    PacketRecord& rec = packets_[pkt];

    if (std::find(rec.path.begin(), rec.path.end(), next) != rec.path.end()) {
      ++stats_.loop_drops;
      drop(pkt, DropReason::Buffer);
      return;
    }
    if (!usable_next_hop(n, next)) ++stats_.hop_violations;
    Frame f = make_frame(FrameKind::Data, n.id, next, sched_.now(),
                         DataPayload{pkt, rec.src, kSink});
    enqueue(n, std::move(f));
  }

  void on_data(Node& r, const Frame& f) {
    const auto& d = std::get<DataPayload>(f.payload);
    PacketRecord& rec = packets_[d.pkt_id];
    if (r.id == d.final_dst) {
      rec.path.push_back(r.id);
      deliver_packet(d.pkt_id);
      return;
    }
    if (std::find(rec.path.begin(), rec.path.end(), r.id) != rec.path.end()) {
      ++stats_.loop_drops;
      drop(d.pkt_id, DropReason::Buffer);
      return;
    }
    rec.path.push_back(r.id);
    mark_relaying(r);
    route_data(r, d.pkt_id);
  }

  void deliver_packet(std::uint64_t pkt) {
    PacketRecord& rec = packets_[pkt];
    if (rec.delivered_at) return;
    if (!rec.dropped) --unresolved_;
    rec.dropped.reset();
    rec.delivered_at = sched_.now();
    rec.hops = static_cast<std::uint32_t>(rec.path.size() - 1);
    delivered_bits_ += static_cast<double>(rec.size) * 8.0;
  }

  // A packet's fate is final once set, except that a delivery supersedes an
  // earlier drop (e.g. the data arrived but every ACK was lost).
  void drop(std::uint64_t pkt, DropReason why) {
    PacketRecord& rec = packets_[pkt];
    if (rec.resolved()) return;
    rec.dropped = why;
    --unresolved_;
  }

  void force_resolve() {
    for (const auto& n : nodes_) {
      for (const auto& f : n.mac->queue()) {
        if (f.kind == FrameKind::Data) drop(std::get<DataPayload>(f.payload).pkt_id, DropReason::Queue);
      }
    }
    for (auto& rec : packets_) {
      if (!rec.resolved()) drop(rec.id, DropReason::Buffer);
    }
  }

  // --- route discovery ------------------------------------------------------------------

  bool aodv_enabled() const noexcept { return sc_.mode != Mode::ClusterOnly; }

  // In the hybrid stack cluster members are leaves; heads, unclustered nodes
  // and the sink carry discovery traffic.
  bool takes_part_in_discovery(const Node& n) const {
    if (!aodv_enabled()) return false;
    if (n.is_sink || sc_.mode == Mode::AodvOnly) return true;
    return n.role != Role::Member && n.role != Role::Joining;
  }

  void buffer_and_discover(Node& n, std::uint64_t pkt, NodeId dest) {
    Discovery& d = n.discovery[dest];
    if (d.buffered.size() >= sc_.route.buffer_pkts) {
      drop(pkt, DropReason::Buffer);
      return;
    }
    d.buffered.push_back(pkt);
    if (!d.active) {
      d.active = true;
      d.attempt = 0;
      d.window_open = false;
      d.candidates.clear();
      send_rreq(n, dest, d);
    }
  }

  void send_rreq(Node& n, NodeId dest, Discovery& d) {
    const std::uint32_t id = ++n.rreq_id;
    n.rreq_cache.first_seen(n.id, id);
    RreqPayload p{n.id, id, dest, 0, remaining(n.ledger), ++n.seq, n.want_seq[dest]};
    ++stats_.rreq_sent;
    ++stats_.rreq_originated;
    enqueue(n, make_frame(FrameKind::Rreq, n.id, kBroadcast, sched_.now(), p));
    const double wait = sc_.route.rreq_timeout_s * std::ldexp(1.0, d.attempt);
    schedule_in(wait, EvKind::RreqTimeout, n.id, dest, ++d.token);
  }

  void on_discover(Node& n, NodeId dest) {
    if (n.dead || dest >= nodes_.size() || dest == n.id || !aodv_enabled()) return;
    Discovery& d = n.discovery[dest];
    if (d.active) return;
    d.active = true;
    d.attempt = 0;
    d.window_open = false;
    d.candidates.clear();
    send_rreq(n, dest, d);
  }

  void on_rreq_timeout(Node& n, NodeId dest, std::uint64_t token) {
    auto it = n.discovery.find(dest);
    if (it == n.discovery.end() || n.dead) return;
    Discovery& d = it->second;
    if (!d.active || d.token != token || d.window_open) return;
    ++d.attempt;
    if (d.attempt > sc_.route.rreq_retries) {
      for (auto pkt : d.buffered) drop(pkt, DropReason::Buffer);
      const auto tok = d.token;
      d = Discovery{};
      d.token = tok;
      touch(n);
      return;
    }
    send_rreq(n, dest, d);
  }

  void on_rreq(Node& r, const Frame& f) {
    const auto& q = std::get<RreqPayload>(f.payload);
    if (q.origin == r.id || !takes_part_in_discovery(r)) return;
    const bool first = r.rreq_cache.first_seen(q.origin, q.rreq_id);
    const SimTime now = sched_.now();
    const double bottleneck = r.is_sink ? q.bottleneck : std::min(q.bottleneck, remaining(r.ledger));
    if (first) {
      r.routes.offer({q.origin, f.src, q.hop + 1, bottleneck, q.origin_seq,
                      now + sc_.route.active_route_s},
                     now);
    }
    if (r.id == q.dest) {
      // Answer each distinct previous hop once so the origin can choose.
      int& answered = r.rrep_answers[{q.origin, q.rreq_id}];
      if (answered >= 3) return;
      ++answered;
      if (first) r.seq = std::max(r.seq + 1, q.dest_seq);
      send_rrep(r, f.src, RrepPayload{q.origin, r.id, q.rreq_id, 0, bottleneck, r.seq});
      return;
    }
    if (!first) return;
    // A node holding a route at least as fresh as the origin demands may
    // answer, unless that route leads straight back to the asker.
    if (auto route = r.routes.lookup(q.dest, now);
        route && route->dest_seq >= q.dest_seq && route->next_hop != f.src &&
        route->next_hop != q.origin && usable_next_hop(r, route->next_hop)) {
      send_rrep(r, f.src,
                RrepPayload{q.origin, q.dest, q.rreq_id, route->hop_count,
                            std::min(bottleneck, route->bottleneck_energy), route->dest_seq});
      return;
    }
    RreqPayload fwd = q;
    fwd.hop = q.hop + 1;
    fwd.bottleneck = bottleneck;
    const std::uint64_t key = next_fwd_++;
    pending_fwd_.emplace(key, make_frame(FrameKind::Rreq, r.id, kBroadcast, now, fwd));
    schedule_in(rng_.jitter.uniform(0.0, sc_.route.rreq_jitter_s), EvKind::RreqForward, r.id, key);
  }

  void on_rreq_forward(Node& r, std::uint64_t key) {
    auto it = pending_fwd_.find(key);
    if (it == pending_fwd_.end()) return;
    Frame f = std::move(it->second);
    pending_fwd_.erase(it);
    if (r.dead) return;
    ++stats_.rreq_sent;
    enqueue(r, std::move(f));
  }

  void send_rrep(Node& r, NodeId to, const RrepPayload& p) {
    ++stats_.rrep_sent;
    enqueue(r, make_frame(FrameKind::Rrep, r.id, to, sched_.now(), p));
  }

  void on_rrep(Node& r, const Frame& f) {
    const auto& p = std::get<RrepPayload>(f.payload);
    const SimTime now = sched_.now();
    const RouteEntry fwd{p.dest, f.src, p.hop + 1, p.bottleneck, p.dest_seq,
                         now + sc_.route.active_route_s};
    if (r.id == p.origin) {
      auto it = r.discovery.find(p.dest);
      if (it == r.discovery.end() || !it->second.active) {
        r.routes.offer(fwd, now);
        return;
      }
      Discovery& d = it->second;
      d.candidates.push_back(fwd);
      if (!d.window_open) {
        d.window_open = true;
        schedule_in(sc_.route.rrep_window_s, EvKind::RrepWindowEnd, r.id, p.dest, d.token);
      }
      return;
    }
    r.routes.offer(fwd, now);
    auto back = r.routes.lookup(p.origin, now);
    if (!back || !usable_next_hop(r, back->next_hop)) return;
    mark_relaying(r);
    RrepPayload next = p;
    next.hop = p.hop + 1;
    send_rrep(r, back->next_hop, next);
  }

  void on_rrep_window_end(Node& n, NodeId dest, std::uint64_t token) {
    auto it = n.discovery.find(dest);
    if (it == n.discovery.end() || n.dead) return;
    Discovery& d = it->second;
    if (!d.active || d.token != token || d.candidates.empty()) return;
    n.routes.install(select_route(d.candidates));
    std::deque<std::uint64_t> flush = std::move(d.buffered);
    const auto tok = d.token + 1;
    d = Discovery{};
    d.token = tok;
    for (auto pkt : flush) route_data(n, pkt);
  }

  void on_link_break(Node& n, NodeId hop) {
    if (hop == kNoNode || hop == kBroadcast) return;
    n.nbrs.remove(hop);
    for (const auto& [dest, e] : n.routes.entries()) {
      if (e.next_hop == hop) n.want_seq[dest] = std::max(n.want_seq[dest], e.dest_seq + 1);
    }
    n.routes.invalidate_via(hop);
    if (n.relay_next == hop) n.relay_next = kNoNode;
    auto pulled = n.mac->withdraw([hop](const Frame& f) {
      return f.kind == FrameKind::Data && f.dst == hop;
    });
    if ((n.role == Role::Member || n.role == Role::Joining) && n.ch == hop) {
      become_unclustered(n);
    }
    for (auto& f : pulled) {
      const auto pkt = std::get<DataPayload>(f.payload).pkt_id;
      if (n.role == Role::Member) {
        app_requeue(n, pkt);
      } else {
        route_data(n, pkt);
      }
    }
  }

  void app_requeue(Node& n, std::uint64_t pkt) {
    if (n.uplink.size() >= sc_.route.buffer_pkts) {
      drop(pkt, DropReason::Buffer);
      return;
    }
    n.uplink.push_front(pkt);
    arm_slot(n);
  }

  // --- clustering ---------------------------------------------------------------------------

  void on_round_start(std::uint32_t round) {
    const SimTime now = sched_.now();
    if (now <= sc_.sim_time_s) ++stats_.ch_rounds;
    const double e_max = sc_.energy.e0_j;
    for (auto& n : nodes_) {
      if (n.is_sink || n.dead) continue;
      wake(n);
      n.prev_ch = n.role == Role::Member ? n.ch : kNoNode;
      n.round = round;
      n.role = Role::Undecided;
      n.settled = false;
      n.heard_heads.clear();
      n.joined.clear();
      n.ch = kNoNode;
      n.slot = {};
      ++n.slot_token;
      n.slot_pending = false;
      ++n.sleep_token;
      n.adv_queued = false;
      n.vr = election_.draw_vr(rng_.election);
      const double e_i = std::clamp(remaining(n.ledger), 0.0, e_max);
      const double wait = waiting_time(e_i, e_max, election_.t2, n.vr);
      schedule_in(wait, EvKind::ElectionTimer, n.id, ++n.election_token);
    }
    const double vr_top = std::max(election_.vr_hi, election_.pin_vr.value_or(0.0));
    const SimTime join_at = now + election_.t2 * vr_top + 0.05;
    schedule(join_at, EvKind::JoinPhase, kNoNode, round);
    schedule(join_at + kJoinWindow, EvKind::SchedulePhase, kNoNode, round);
    schedule(join_at + kJoinWindow + kScheduleGuard * 2.0, EvKind::ScheduleDeadline, kNoNode, round);
    schedule(now + election_.t1, EvKind::RoundStart, kNoNode, round + 1);
  }

  double competition_radius(const Node& n) const {
    const double d_i = std::clamp(distance(n.pos, sink_pos_), election_.d_min, election_.d_max);
    return overlying_radius(d_i, election_.d_max, election_.d_min, election_.alpha, election_.r_max);
  }

  void on_election_timer(Node& n, std::uint64_t token) {
    if (n.dead || token != n.election_token || n.role != Role::Undecided) return;
    n.role = Role::ClusterHead;
    n.adv_queued = true;
    enqueue(n, make_frame(FrameKind::AdvCh, n.id, kBroadcast, sched_.now(),
                          AdvChPayload{n.round, remaining(n.ledger), competition_radius(n)}));
  }

  void on_adv(Node& r, const Frame& f) {
    const auto& adv = std::get<AdvChPayload>(f.payload);
    if (r.is_sink || adv.round != r.round) return;
    r.heard_heads.push_back({f.src, f.sender_pos, distance(r.pos, f.sender_pos)});
    const AdvView view{f.src, f.sender_pos, adv.radius};
    if (!adv_suppresses(view, r.pos, nullptr)) return;
    if (r.role == Role::Undecided) {
      ++r.election_token;
      r.role = Role::Suppressed;
    } else if (r.role == Role::ClusterHead && r.adv_queued) {
      auto pulled = r.mac->withdraw([](const Frame& x) { return x.kind == FrameKind::AdvCh; });
      if (!pulled.empty()) {
        r.adv_queued = false;
        r.role = Role::Suppressed;
      }
    }
  }

  void on_join_phase(std::uint32_t round) {
    for (auto& n : nodes_) {
      if (n.is_sink || n.dead || n.round != round) continue;
      if (n.role == Role::ClusterHead) {
        std::vector<RelayCandidate> heads;
        for (const auto& h : n.heard_heads) heads.push_back({h.id, h.pos});
        n.relay_next = choose_relay(kSink, n.pos, sink_pos_, heads, sc_.radio.range_m);
        n.settled = true;
        flush_uplink(n);
        continue;
      }
      n.relay_next = kNoNode;
      if (n.role != Role::Suppressed) continue;
      const NodeId head = choose_cluster_head(n.heard_heads);
      if (head == kNoNode) {
        become_unclustered(n);
        continue;
      }
      n.ch = head;
      n.role = Role::Joining;
      // Spread the joins; a network-wide burst at one instant collides badly.
      schedule_in(rng_.jitter.uniform(0.0, kJoinSpread), EvKind::JoinSend, n.id, round);
    }
  }

  void on_join_send(Node& n, std::uint32_t round) {
    if (n.dead || n.round != round || n.role != Role::Joining) return;
    enqueue(n, make_frame(FrameKind::Join, n.id, n.ch, sched_.now(),
                          JoinPayload{round, remaining(n.ledger)}));
  }

  void on_join(Node& ch, const Frame& f) {
    const auto& j = std::get<JoinPayload>(f.payload);
    if (ch.role != Role::ClusterHead || j.round != ch.round) return;
    if (std::find(ch.joined.begin(), ch.joined.end(), f.src) == ch.joined.end()) {
      ch.joined.push_back(f.src);
    }
  }

  void on_schedule_phase(std::uint32_t round) {
    const SimTime now = sched_.now();
    for (auto& n : nodes_) {
      if (n.is_sink || n.dead || n.round != round || n.role != Role::ClusterHead) continue;
      if (n.joined.empty()) continue;
      SchedulePayload p{round, now + kScheduleGuard, election_.slot_s, n.joined};
      n.slot = {true, p.frame_start, p.slot_len, n.joined.size(), 0};
      enqueue(n, make_frame(FrameKind::Schedule, n.id, kBroadcast, now, std::move(p)));
    }
  }

  void on_schedule(Node& m, const Frame& f) {
    const auto& s = std::get<SchedulePayload>(f.payload);
    if (m.is_sink || s.round != m.round || m.role != Role::Joining || m.ch != f.src) return;
    auto it = std::find(s.members.begin(), s.members.end(), m.id);
    if (it == s.members.end()) {
      become_unclustered(m);
      return;
    }
    m.role = Role::Member;
    m.settled = true;
    m.slot = {true, s.frame_start, s.slot_len, s.members.size(),
              static_cast<std::size_t>(it - s.members.begin())};
    arm_slot(m);
    touch(m);
  }

  void on_schedule_deadline(std::uint32_t round) {
    for (auto& n : nodes_) {
      if (n.is_sink || n.dead || n.round != round) continue;
      if (n.role == Role::Joining || n.role == Role::Suppressed || n.role == Role::Undecided) {
        become_unclustered(n);
      }
    }
  }

  void become_unclustered(Node& n) {
    if (n.role != Role::Unclustered) ++stats_.unclustered;
    n.role = Role::Unclustered;
    n.settled = true;
    n.ch = kNoNode;
    n.slot = {};
    ++n.slot_token;
    n.slot_pending = false;
    wake(n);
    flush_uplink(n);
  }

  void flush_uplink(Node& n) {
    std::deque<std::uint64_t> pending = std::move(n.uplink);
    n.uplink.clear();
    for (auto pkt : pending) route_data(n, pkt);
  }

  void arm_slot(Node& n) {
    if (n.role != Role::Member || !n.slot.valid || n.uplink.empty() || n.slot_pending) return;
    const SimTime at = next_slot_start(n.slot.frame_start, n.slot.slot_len, n.slot.n_slots,
                                       n.slot.index, sched_.now());
    n.slot_pending = true;
    schedule(at, EvKind::SlotStart, n.id, ++n.slot_token);
  }

  void on_slot_start(Node& n, std::uint64_t token) {
    if (token != n.slot_token) return;
    n.slot_pending = false;
    if (n.dead || n.role != Role::Member || n.uplink.empty()) return;
    if (!usable_next_hop(n, n.ch)) {
      on_link_break(n, n.ch);  // leaves the cluster and reroutes the uplink
      return;
    }
    const std::uint64_t pkt = n.uplink.front();
    n.uplink.pop_front();
    forward_to(n, pkt, n.ch);
    if (!n.uplink.empty() && n.role == Role::Member) {
      const SimTime at = next_slot_start(n.slot.frame_start, n.slot.slot_len, n.slot.n_slots,
                                         n.slot.index, sched_.now() + n.slot.slot_len / 2.0);
      n.slot_pending = true;
      schedule(at, EvKind::SlotStart, n.id, ++n.slot_token);
    }
    touch(n);
  }

  // --- results ------------------------------------------------------------------------------

  MetricsTable metrics() const {
    MetricsTable m;
    m.scenario = sc_.name;
    m.seed = sc_.seed;
    m.nodes = sc_.nodes;
    m.offered_load_bits =
        cbr_.sources.empty() ? 0.0 : sc_.traffic.load_bps * std::max(0.0, cbr_.stop_t - cbr_.start_t);
    m.generated = packets_.size();
    for (const auto& r : packets_) {
      if (r.delivered_at) {
        ++m.delivered;
      } else if (r.dropped) {
        m.drops.add(*r.dropped);
      }
    }
    m.mean_delay_s = mean_delay(packets_);
    m.throughput_kbps = throughput_kbps(packets_, sc_.sim_time_s);
    const EnergyReport rep = energy_report(snapshot_);
    m.total_energy_j = rep.total_j;
    m.mean_energy_j = rep.mean_j;
    m.per_node_energy_j = rep.per_node_j;
    m.beacons_sent = stats_.beacons_sent;
    m.rreq_sent = stats_.rreq_sent;
    m.ch_rounds = stats_.ch_rounds;
    m.throughput_samples = samples_;
    return m;
  }

  Scenario sc_;
  RngStreams rng_;
  Grid grid_;
  RadioParams radio_;
  Position sink_pos_;
  ElectionParams election_;
  Scheduler<EvPayload> sched_;
  std::vector<Node> nodes_;
  CbrConfig cbr_;
  std::vector<Emission> emissions_;
  std::vector<Emission> injected_;
  std::vector<Jammer> jammers_;
  std::vector<ScriptedDiscovery> discoveries_;
  std::map<std::uint64_t, Transmission> active_;
  std::uint64_t next_tx_ = 0;
  std::map<std::uint64_t, Frame> pending_fwd_;
  std::uint64_t next_fwd_ = 0;
  std::vector<PacketRecord> packets_;
  std::vector<char> on_route_;  // per packet: following a discovered route
  std::uint64_t unresolved_ = 0;
  double delivered_bits_ = 0.0;
  std::vector<ThroughputSample> samples_;
  std::vector<EnergyLedger> snapshot_;
  NetworkStats stats_;
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
  std::ostream* trace_ = nullptr;
  bool ran_ = false;
  bool horizon_done_ = false;
};

}  // namespace wsnsim
