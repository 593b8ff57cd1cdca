#pragma once

// Unslotted (non-beacon) CSMA/CA with acknowledgements, retransmissions and a
// bounded FIFO, modelled after 802.15.4 at 250 kb/s.
//
// CsmaMac is driven by a Host that owns the clock and the channel:
//
//   SimTime now();
//   void mac_schedule(NodeId self, SimTime delay, MacTimer timer, std::uint64_t token);
//   bool mac_channel_busy(NodeId self);
//   void mac_begin_airing(NodeId self, const Frame& frame);  // host calls on_airing_end()
//   RngStream& mac_backoff_rng();
//   void mac_frame_done(NodeId self, const Frame& frame, MacOutcome outcome);
//   void mac_queue_drop(NodeId self, const Frame& frame);

#include "errors.hpp"
#include "frame.hpp"
#include "sim_core.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <vector>

namespace wsnsim {

struct MacParams {
  int min_be = 3;
  int max_be = 5;
  int max_csma_backoffs = 4;
  int max_retries = 3;
  std::size_t queue_len = 100;
  double unit_backoff_s = 320e-6;
  double cca_s = 128e-6;
  double turnaround_s = 192e-6;
  double ack_timeout_s = 864e-6;
  double bitrate_bps = 250000.0;
  std::uint32_t phy_overhead_bits = 48;

  void validate() const {
    if (!(min_be >= 0 && min_be <= max_be && max_be <= 20 && max_csma_backoffs >= 0 &&
          max_retries >= 0 && queue_len >= 1)) {
      throw ConfigError("MAC parameters out of range");
    }
  }
};

inline double airtime(std::uint32_t size_bytes, const MacParams& p) {
  if (size_bytes == 0) throw DomainError("airtime: frame size must be positive");
  return (static_cast<double>(size_bytes) * 8.0 + p.phy_overhead_bits) / p.bitrate_bps;
}

inline double airtime(const Frame& f, const MacParams& p) { return airtime(f.size, p); }

// Random backoff of r unit periods, r uniform in [0, 2^be - 1].
inline double backoff_delay(int be, RngStream& rng, double unit_backoff_s = 320e-6) {
  if (be < 0 || be > 30) throw DomainError("backoff_delay: exponent out of range");
  const auto slots = rng.uniform_int(0, (std::int64_t{1} << be) - 1);
  return static_cast<double>(slots) * unit_backoff_s;
}

enum class MacTimer : std::uint8_t { BackoffEnd, AckTimeout };
enum class MacOutcome : std::uint8_t { Sent, ChannelAccessFailure, RetryExhausted };

struct MacCounters {
  std::uint64_t offered = 0;      // frames handed to enqueue()
  std::uint64_t sent = 0;         // broadcasts aired + unicasts acknowledged
  std::uint64_t csma_fail = 0;
  std::uint64_t retry_fail = 0;
  std::uint64_t queue_drop = 0;
  std::uint64_t withdrawn = 0;    // pulled back by the upper layer
  std::uint64_t flushed = 0;      // discarded when the node died
  std::uint64_t airings = 0;
  std::uint64_t busy_cca = 0;
};

class CsmaState {
 public:
  int be = 3;
  int nb = 0;
  int retries = 0;
};

template <typename Host>
class CsmaMac {
 public:
  enum class Phase : std::uint8_t { Idle, Backoff, Airing, WaitAck, Off };

  CsmaMac(NodeId self, const MacParams& params, Host& host)
      : self_(self), params_(params), host_(&host) {}

  // Appends a frame; rejects it when the queue (including the frame in
  // service) already holds queue_len frames.
  bool enqueue(Frame frame) {
    ++counters_.offered;
    if (phase_ == Phase::Off || queue_.size() >= params_.queue_len) {
      ++counters_.queue_drop;
      host_->mac_queue_drop(self_, frame);
      return false;
    }
    frame.mac_seq = next_seq_++;
    queue_.push_back(std::move(frame));
    if (phase_ == Phase::Idle) start_service();
    return true;
  }

  void on_timer(MacTimer timer, std::uint64_t token) {
    if (token != token_) return;
    switch (timer) {
      case MacTimer::BackoffEnd:
        if (phase_ == Phase::Backoff) clear_channel_assessment();
        break;
      case MacTimer::AckTimeout:
        if (phase_ == Phase::WaitAck) {
          ++csma_.retries;
          if (csma_.retries > params_.max_retries) {
            finish(MacOutcome::RetryExhausted);
          } else {
            csma_.nb = 0;
            csma_.be = params_.min_be;
            start_backoff();
          }
        }
        break;
    }
  }

  void on_airing_end() {
    if (phase_ != Phase::Airing) return;
    if (queue_.front().broadcast()) {
      finish(MacOutcome::Sent);
      return;
    }
    phase_ = Phase::WaitAck;
    host_->mac_schedule(self_, params_.ack_timeout_s, MacTimer::AckTimeout, ++token_);
  }

  // An ACK from `from` acknowledging `mac_seq` was decoded.
  void on_ack(NodeId from, std::uint32_t mac_seq) {
    if (phase_ != Phase::WaitAck) return;
    const Frame& head = queue_.front();
    if (head.dst != from || head.mac_seq != mac_seq) return;
    ++token_;
    finish(MacOutcome::Sent);
  }

  // Removes queued frames matching `pred`. The head frame is included while
  // it is only backing off; once on the air or awaiting its ACK it stays.
  template <typename Pred>
  std::vector<Frame> withdraw(Pred&& pred) {
    std::vector<Frame> out;
    const bool head_locked = phase_ == Phase::Airing || phase_ == Phase::WaitAck;
    bool head_taken = false;
    for (std::size_t i = head_locked ? 1 : 0; i < queue_.size();) {
      if (pred(static_cast<const Frame&>(queue_[i]))) {
        head_taken = head_taken || i == 0;
        out.push_back(std::move(queue_[i]));
        queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        ++i;
      }
    }
    counters_.withdrawn += out.size();
    if (head_taken && phase_ == Phase::Backoff) {
      ++token_;
      phase_ = Phase::Idle;
      if (!queue_.empty()) start_service();
    }
    return out;
  }

  // Node death: the MAC stops and hands back everything it still holds.
  std::vector<Frame> shut_down() {
    ++token_;
    phase_ = Phase::Off;
    std::vector<Frame> out(std::make_move_iterator(queue_.begin()),
                           std::make_move_iterator(queue_.end()));
    queue_.clear();
    counters_.flushed += out.size();
    return out;
  }

  bool idle() const noexcept { return phase_ == Phase::Idle && queue_.empty(); }
  bool airing() const noexcept { return phase_ == Phase::Airing; }
  Phase phase() const noexcept { return phase_; }
  std::size_t queue_size() const noexcept { return queue_.size(); }
  const std::deque<Frame>& queue() const noexcept { return queue_; }
  const CsmaState& csma() const noexcept { return csma_; }
  const MacCounters& counters() const noexcept { return counters_; }
  const MacParams& params() const noexcept { return params_; }
  NodeId self() const noexcept { return self_; }

 private:
  void start_service() {
    csma_.nb = 0;
    csma_.be = params_.min_be;
    csma_.retries = 0;
    start_backoff();
  }

  void start_backoff() {
    phase_ = Phase::Backoff;
    const double delay =
        backoff_delay(csma_.be, host_->mac_backoff_rng(), params_.unit_backoff_s) + params_.cca_s;
    host_->mac_schedule(self_, delay, MacTimer::BackoffEnd, ++token_);
  }

  void clear_channel_assessment() {
    if (host_->mac_channel_busy(self_)) {
      ++counters_.busy_cca;
      ++csma_.nb;
      csma_.be = std::min(csma_.be + 1, params_.max_be);
      if (csma_.nb > params_.max_csma_backoffs) {
        finish(MacOutcome::ChannelAccessFailure);
      } else {
        start_backoff();
      }
      return;
    }
    phase_ = Phase::Airing;
    ++counters_.airings;
    host_->mac_begin_airing(self_, queue_.front());
  }

  void finish(MacOutcome outcome) {
    Frame done = std::move(queue_.front());
    queue_.pop_front();
    switch (outcome) {
      case MacOutcome::Sent: ++counters_.sent; break;
      case MacOutcome::ChannelAccessFailure: ++counters_.csma_fail; break;
      case MacOutcome::RetryExhausted: ++counters_.retry_fail; break;
    }
    phase_ = Phase::Idle;
    host_->mac_frame_done(self_, done, outcome);
    if (phase_ == Phase::Idle && !queue_.empty()) start_service();
  }

  NodeId self_;
  MacParams params_;
  Host* host_;
  Phase phase_ = Phase::Idle;
  CsmaState csma_;
  std::deque<Frame> queue_;
  std::uint32_t next_seq_ = 0;
  std::uint64_t token_ = 0;
  MacCounters counters_;
};

}  // namespace wsnsim
