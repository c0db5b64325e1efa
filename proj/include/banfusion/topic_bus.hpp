/**
 * @file topic_bus.hpp
 * @brief In-process publish-subscribe bus with named, schema-checked topics.
 *
 * Topics are abstraction layers between producers and consumers: a publisher
 * can be swapped without any change on the subscriber side. Delivery is
 * exactly-once and in publish order; subscribers only see envelopes published
 * after their subscription (no replay — historical access is the storage
 * module's job).
 *
 * Thread-safety: publishers and subscribers may operate concurrently from any
 * thread. Ordering is guaranteed per publisher.
 */

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "banfusion/records.hpp"

namespace banfusion {

struct TopicEnvelope {
    std::string topic_name;
    std::string publisher_id;
    TimestampMs publish_ts = 0;
    std::uint64_t sequence = 0; // strictly increasing per (publisher, topic)
    Payload payload;
};

class TopicBus;

/// Receiving end of a subscription. Owns an unbounded FIFO queue fed by
/// publishers; drain() empties it in delivery order.
class Subscriber {
public:
    const std::string& topic_name() const { return topic_name_; }
    const std::string& subscriber_id() const { return subscriber_id_; }

    std::optional<TopicEnvelope> try_pop();
    std::vector<TopicEnvelope> drain();

    /// Envelopes delivered since subscription (queued + already popped).
    std::uint64_t delivery_count() const;

    /// True once the queue crossed the bus's high-water mark.
    bool high_water_reached() const;

private:
    friend class TopicBus;
    Subscriber(std::string topic, std::string id, std::size_t high_water)
        : topic_name_(std::move(topic)), subscriber_id_(std::move(id)),
          high_water_(high_water) {}

    void deliver(const TopicEnvelope& env);

    std::string topic_name_;
    std::string subscriber_id_;
    std::size_t high_water_;
    mutable std::mutex mutex_;
    std::deque<TopicEnvelope> queue_;
    std::uint64_t delivered_ = 0;
    bool high_water_hit_ = false;
};

using SubscriberPtr = std::shared_ptr<Subscriber>;

/// Publishing end bound to one (publisher_id, topic) pair; hands out
/// monotonically increasing sequence numbers.
class Publisher {
public:
    const std::string& topic_name() const { return topic_name_; }
    const std::string& publisher_id() const { return publisher_id_; }

    TopicEnvelope publish(Payload payload);

private:
    friend class TopicBus;
    Publisher(TopicBus* bus, std::string topic, std::string id)
        : bus_(bus), topic_name_(std::move(topic)), publisher_id_(std::move(id)) {}

    TopicBus* bus_;
    std::string topic_name_;
    std::string publisher_id_;
};

class TopicBus {
public:
    struct Options {
        std::size_t high_water_mark = 100000;
        std::function<TimestampMs()> clock; // defaults to system clock
    };

    TopicBus() : TopicBus(Options{}) {}
    explicit TopicBus(Options options);

    TopicBus(const TopicBus&) = delete;
    TopicBus& operator=(const TopicBus&) = delete;

    /// Registers a topic. Throws empty_name / duplicate_topic.
    void create_topic(const std::string& name, RecordKind schema_kind);

    bool has_topic(const std::string& name) const;
    std::vector<std::string> topic_names() const;
    RecordKind topic_kind(const std::string& name) const;
    std::size_t subscriber_count(const std::string& name) const;

    /// Binds a publisher identity to a topic. Throws unknown_topic.
    Publisher make_publisher(const std::string& topic, const std::string& publisher_id);

    /// Publishes one payload; every current subscriber receives exactly one
    /// copy. Throws unknown_topic / schema_mismatch.
    TopicEnvelope publish(const std::string& topic, const std::string& publisher_id,
                          Payload payload);

    /// Subscribes; only envelopes published after this call are delivered.
    SubscriberPtr subscribe(const std::string& topic, const std::string& subscriber_id);

private:
    struct Topic {
        RecordKind kind;
        std::mutex mutex;
        std::map<std::string, std::uint64_t> next_sequence; // per publisher
        std::map<std::string, TimestampMs> last_publish_ts; // per publisher
        std::vector<SubscriberPtr> subscribers;
    };

    Topic& find_topic(const std::string& name) const;

    Options options_;
    mutable std::mutex registry_mutex_;
    std::map<std::string, std::unique_ptr<Topic>> topics_;
};

} // namespace banfusion
