// Copyright 2026 The eegcare Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eegcare/sim/virtual_device.hpp"

#include <poll.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <random>
#include <thread>

#include "eegcare/sim/protocol.hpp"

namespace eegcare::sim {

using Clock = std::chrono::steady_clock;

device::SampleFrame make_frame(const SignalSpec& spec, const device::DeviceConfig& config,
                               const device::PeripheralProfile& profile, std::uint64_t index) {
  const auto spp = static_cast<std::size_t>(config.samples_per_packet);
  const auto per_channel = generate_samples(spec, config, profile.calibration(), index * spp, spp);
  device::SampleFrame f;
  f.sequence = static_cast<std::uint16_t>(index & 0xFFFF);
  f.samples.reserve(per_channel.size() * spp);
  for (const auto& ch : per_channel) f.samples.insert(f.samples.end(), ch.begin(), ch.end());
  return f;
}

std::uint64_t frames_for_duration(std::uint64_t duration_ms, const device::DeviceConfig& config) {
  const std::uint64_t num = duration_ms * static_cast<std::uint64_t>(config.rate);
  const std::uint64_t den = 1000ull * static_cast<std::uint64_t>(config.samples_per_packet);
  return (num + den - 1) / den;
}

struct VirtualDevice::Impl {
  device::PeripheralProfile profile;
  SignalSpec signal;
  FaultModel faults;
  DeviceOptions options;
  device::DeviceConfig initial;
  device::DeviceConfig config;

  net::Listener listener;
  net::Endpoint bound;
  std::thread thread;
  std::atomic<bool> stop_requested{false};

  mutable std::mutex mu;
  std::condition_variable cv;
  bool done = false;
  bool started = false;
  DeviceReport rep;  // guarded by mu

  // Serving-thread state.
  enum class Stream { kIdle, kStreaming, kFinished };
  struct Pending {
    Clock::time_point at;
    Bytes message;
    bool data = false;
  };
  std::optional<net::Socket> client;
  Stream stream = Stream::kIdle;
  Clock::time_point t0;
  std::uint64_t next = 0;
  std::uint64_t limit = 0;  // 0 = until STOP
  std::deque<Pending> pending;
  Clock::time_point last_send_at;
  std::mt19937_64 rng;
  std::optional<Clock::time_point> reopen_at;
  Clock::time_point client_lost_at;
  Clock::time_point finished_at;
  bool end_delivered = false;
  StreamSummary final_summary;

  bool fast() const { return options.pacing == Pacing::kFast; }
  double period() const { return static_cast<double>(config.samples_per_packet) / config.rate; }
  Clock::time_point due(std::uint64_t k) const {
    return t0 + std::chrono::duration_cast<Clock::duration>(
                    std::chrono::duration<double>(static_cast<double>(k + 1) * period()));
  }

  template <typename F>
  void update(F&& f) {
    std::lock_guard lock(mu);
    f(rep);
  }

  void send(const Bytes& message) {
    if (!client) return;
    try {
      client->send_message(message);
    } catch (const net::TransportError&) {
      drop_client();
    }
  }

  void send_error(const std::string& text) { send(encode_message(Opcode::kError, text)); }

  void drop_client() {
    if (!client) return;
    client.reset();
    std::uint64_t lost = 0;
    for (const auto& p : pending) lost += p.data ? 1 : 0;
    pending.clear();
    client_lost_at = Clock::now();
    update([&](DeviceReport& r) { r.frames_lost += lost; });
  }

  void flush_pending(Clock::time_point now, bool all) {
    while (!pending.empty() && client && (all || pending.front().at <= now)) {
      Pending p = std::move(pending.front());
      pending.pop_front();
      send(p.message);
      if (p.data) {
        const bool ok = client.has_value();
        update([ok](DeviceReport& r) { ++(ok ? r.frames_delivered : r.frames_lost); });
      }
    }
  }

  void end_stream() {
    flush_pending(Clock::now(), true);
    StreamSummary s;
    {
      std::lock_guard lock(mu);
      s = {static_cast<std::uint32_t>(rep.frames_sent), static_cast<std::uint32_t>(rep.frames_dropped),
           static_cast<std::uint32_t>(rep.frames_lost)};
    }
    final_summary = s;
    send(encode_message(Opcode::kStreamEnd, encode_stream_end(s)));
    end_delivered = client.has_value();
    stream = Stream::kFinished;
    finished_at = Clock::now();
  }

  void begin_outage() {
    // Close the listener first so the client cannot slip back in early.
    if (!fast()) listener.close();
    drop_client();
    std::uint64_t skipped = 0;
    std::optional<Outage> last;
    while ((limit == 0 || next < limit)) {
      const auto o = faults.outage_at(static_cast<double>(next) * period());
      if (!o) break;
      last = o;
      ++next;
      ++skipped;
    }
    update([&](DeviceReport& r) {
      r.frames_sent += skipped;
      r.frames_lost += skipped;
      ++r.outages;
    });
    if (!fast() && last) {
      reopen_at = t0 + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(last->at_s + last->down_s));
    }
  }

  void produce(Clock::time_point now) {
    std::bernoulli_distribution drop(faults.drop_probability);
    std::uniform_real_distribution<double> jitter(0.0, std::max(faults.jitter_ms, 1e-9));
    const int burst = fast() ? 64 : 1 << 30;
    for (int i = 0; i < burst && stream == Stream::kStreaming; ++i) {
      if (limit != 0 && next >= limit) {
        end_stream();
        break;
      }
      if (fast() && !client) break;
      if (!fast() && due(next) > now) break;
      if (faults.outage_at(static_cast<double>(next) * period())) {
        begin_outage();
        continue;
      }
      const auto frame = make_frame(signal, config, profile, next);
      const bool dropped = faults.drop_probability > 0.0 && drop(rng);
      const double delay_ms =
          faults.latency_ms + (faults.jitter_ms > 0.0 ? jitter(rng) : 0.0);
      const auto frame_due = due(next);
      ++next;
      update([](DeviceReport& r) { ++r.frames_sent; });
      if (dropped) {
        update([](DeviceReport& r) { ++r.frames_dropped; });
        continue;
      }
      if (!client) {
        update([](DeviceReport& r) { ++r.frames_lost; });
        continue;
      }
      auto message = encode_message(Opcode::kData, device::pack_frame(frame, device::FrameLayout::of(config, profile)));
      if (fast() || delay_ms <= 0.0) {
        pending.push_back({now, std::move(message), true});
      } else {
        auto at = frame_due + std::chrono::duration_cast<Clock::duration>(
                                  std::chrono::duration<double, std::milli>(delay_ms));
        at = std::max(at, last_send_at);  // the link never reorders
        last_send_at = at;
        pending.push_back({at, std::move(message), true});
      }
      flush_pending(now, false);
    }
  }

  void handle(const Message& m) {
    switch (m.opcode) {
      case Opcode::kDiscover:
        send(encode_message(Opcode::kServiceTree, device::to_json(profile).dump()));
        break;
      case Opcode::kConfigure: {
        if (stream != Stream::kIdle) {
          send_error("cannot configure while streaming");
          break;
        }
        try {
          auto req = decode_config(m.body, profile);
          if (req.rate == 0) req.rate = config.rate;
          auto negotiated = device::negotiate_config(req, profile);
          check_signal_spec(signal, static_cast<int>(negotiated.active_channels.size()), negotiated.rate);
          config = std::move(negotiated);
          update([&](DeviceReport& r) { r.config = config; });
          send(encode_message(Opcode::kConfigAck, encode_config(config, profile)));
        } catch (const std::exception& e) {
          send_error(e.what());
        }
        break;
      }
      case Opcode::kStart: {
        if (stream == Stream::kStreaming) break;  // resumed session
        if (stream == Stream::kFinished) {
          send_error("stream already finished");
          break;
        }
        try {
          limit = frames_for_duration(decode_start(m.body), config);
        } catch (const ProtocolError& e) {
          send_error(e.what());
          break;
        }
        stream = Stream::kStreaming;
        t0 = Clock::now();
        last_send_at = t0;
        next = 0;
        rng.seed(faults.seed);
        update([](DeviceReport& r) { r.streamed = true; });
        break;
      }
      case Opcode::kStop:
        if (stream == Stream::kStreaming) {
          end_stream();
        } else {
          send_error("not streaming");
        }
        break;
      default:
        send_error("unexpected opcode");
    }
  }

  void serve() {
    std::vector<pollfd> fds;
    while (!stop_requested.load()) {
      auto now = Clock::now();
      if (reopen_at && now >= *reopen_at) {
        listener = net::Listener(bound);
        reopen_at.reset();
      }
      if (stream == Stream::kStreaming) produce(now);
      flush_pending(now, false);
      if (stream == Stream::kFinished) {
        // A client cut off by an outage may still come back for STREAM_END.
        if (!client && end_delivered) break;
        if (!reopen_at && now - finished_at > std::chrono::duration<double>(options.linger_s)) break;
      }
      if (stream == Stream::kStreaming && !client && !reopen_at &&
          now - client_lost_at > std::chrono::duration<double>(options.idle_timeout_s)) {
        end_stream();
        break;
      }

      auto wake = now + std::chrono::milliseconds(50);
      if (stream == Stream::kStreaming) {
        if (fast() && client) {
          wake = now;
        } else if (!fast()) {
          wake = std::min(wake, due(next));
        }
      }
      if (!pending.empty()) wake = std::min(wake, pending.front().at);
      if (reopen_at) wake = std::min(wake, *reopen_at);
      const auto timeout_ms = std::max<long long>(
          0, std::chrono::duration_cast<std::chrono::milliseconds>(wake - now).count());

      fds.clear();
      if (listener.valid()) fds.push_back({listener.fd(), POLLIN, 0});
      if (client) fds.push_back({client->fd(), POLLIN, 0});
      const int rc = ::poll(fds.data(), fds.size(), static_cast<int>(timeout_ms));
      if (rc <= 0) continue;

      bool client_ready = false;
      bool listener_ready = false;
      for (const auto& p : fds) {
        if (p.revents == 0) continue;
        if (listener.valid() && p.fd == listener.fd()) listener_ready = true;
        if (client && p.fd == client->fd()) client_ready = true;
      }
      if (client_ready) {
        try {
          if (auto bytes = client->recv_message(std::chrono::milliseconds(0))) {
            try {
              handle(decode_message(*bytes));
            } catch (const ProtocolError& e) {
              send_error(e.what());
            }
          }
        } catch (const net::TransportError&) {
          drop_client();
          if (stream == Stream::kFinished) break;
        }
      }
      if (listener_ready) {
        if (auto s = listener.accept(std::chrono::milliseconds(0))) {
          if (client) {
            try {
              s->send_message(encode_message(Opcode::kError, std::string("device busy")));
            } catch (const net::TransportError&) {
            }
          } else {
            client = std::move(*s);
            update([](DeviceReport& r) { ++r.connections; });
            if (stream == Stream::kFinished) {
              send(encode_message(Opcode::kStreamEnd, encode_stream_end(final_summary)));
              end_delivered = client.has_value();
            }
          }
        }
      }
    }
    if (stream == Stream::kStreaming) end_stream();
    client.reset();
    listener.close();
  }
};

VirtualDevice::VirtualDevice(device::PeripheralProfile profile, SignalSpec signal, FaultModel faults,
                             DeviceOptions options)
    : impl_(std::make_unique<Impl>()) {
  device::check_profile(profile);
  check_faults(faults);
  if (options.config) {
    auto req = *options.config;
    if (req.rate == 0) req.rate = profile.max_rate();
    impl_->initial = device::negotiate_config(req, profile);
  } else {
    impl_->initial = device::default_config(profile);
  }
  check_signal_spec(signal, static_cast<int>(impl_->initial.active_channels.size()), impl_->initial.rate);
  impl_->config = impl_->initial;
  impl_->rep.config = impl_->initial;
  impl_->profile = std::move(profile);
  impl_->signal = std::move(signal);
  impl_->faults = std::move(faults);
  impl_->options = std::move(options);
}

VirtualDevice::~VirtualDevice() {
  stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void VirtualDevice::start() {
  if (impl_->started) return;
  impl_->listener = net::Listener(impl_->options.endpoint);
  impl_->bound = impl_->listener.endpoint();
  impl_->started = true;
  impl_->client_lost_at = Clock::now();
  impl_->thread = std::thread([impl = impl_.get()] {
    try {
      impl->serve();
    } catch (const std::exception& e) {
      impl->update([&](DeviceReport& r) { r.error = e.what(); });
    }
    std::lock_guard lock(impl->mu);
    impl->done = true;
    impl->cv.notify_all();
  });
}

void VirtualDevice::stop() { impl_->stop_requested = true; }

DeviceReport VirtualDevice::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
  return report();
}

bool VirtualDevice::wait_for(std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->mu);
  return impl_->cv.wait_for(lock, timeout, [&] { return impl_->done; });
}

bool VirtualDevice::finished() const {
  std::lock_guard lock(impl_->mu);
  return impl_->done;
}

DeviceReport VirtualDevice::report() const {
  std::lock_guard lock(impl_->mu);
  return impl_->rep;
}

net::Endpoint VirtualDevice::endpoint() const { return impl_->bound; }

const device::PeripheralProfile& VirtualDevice::profile() const { return impl_->profile; }

const device::DeviceConfig& VirtualDevice::initial_config() const { return impl_->initial; }

std::unique_ptr<VirtualDevice> run_virtual_device(device::PeripheralProfile profile, SignalSpec signal,
                                                  FaultModel faults, DeviceOptions options) {
  auto d = std::make_unique<VirtualDevice>(std::move(profile), std::move(signal), std::move(faults),
                                           std::move(options));
  d->start();
  return d;
}

}  // namespace eegcare::sim
