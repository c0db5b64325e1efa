#include "banfusion/topic_bus.hpp"

#include <algorithm>
#include <chrono>

namespace banfusion {

namespace {

TimestampMs system_now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

} // namespace

std::optional<TopicEnvelope> Subscriber::try_pop() {
    std::lock_guard lock(mutex_);
    if (queue_.empty()) return std::nullopt;
    TopicEnvelope env = std::move(queue_.front());
    queue_.pop_front();
    return env;
}

std::vector<TopicEnvelope> Subscriber::drain() {
    std::lock_guard lock(mutex_);
    std::vector<TopicEnvelope> out(queue_.begin(), queue_.end());
    queue_.clear();
    return out;
}

std::uint64_t Subscriber::delivery_count() const {
    std::lock_guard lock(mutex_);
    return delivered_;
}

bool Subscriber::high_water_reached() const {
    std::lock_guard lock(mutex_);
    return high_water_hit_;
}

void Subscriber::deliver(const TopicEnvelope& env) {
    std::lock_guard lock(mutex_);
    queue_.push_back(env);
    ++delivered_;
    if (queue_.size() >= high_water_) high_water_hit_ = true;
}

TopicEnvelope Publisher::publish(Payload payload) {
    return bus_->publish(topic_name_, publisher_id_, std::move(payload));
}

TopicBus::TopicBus(Options options) : options_(std::move(options)) {
    if (!options_.clock) options_.clock = system_now_ms;
}

void TopicBus::create_topic(const std::string& name, RecordKind schema_kind) {
    if (name.empty()) throw Error(Errc::empty_name, "topic name must be non-empty");
    std::lock_guard lock(registry_mutex_);
    auto [it, inserted] = topics_.try_emplace(name, nullptr);
    if (!inserted) throw Error(Errc::duplicate_topic, "'" + name + "' already registered");
    it->second = std::make_unique<Topic>();
    it->second->kind = schema_kind;
}

bool TopicBus::has_topic(const std::string& name) const {
    std::lock_guard lock(registry_mutex_);
    return topics_.contains(name);
}

std::vector<std::string> TopicBus::topic_names() const {
    std::lock_guard lock(registry_mutex_);
    std::vector<std::string> names;
    names.reserve(topics_.size());
    for (const auto& [name, _] : topics_) names.push_back(name);
    return names;
}

RecordKind TopicBus::topic_kind(const std::string& name) const {
    return find_topic(name).kind;
}

std::size_t TopicBus::subscriber_count(const std::string& name) const {
    Topic& topic = find_topic(name);
    std::lock_guard lock(topic.mutex);
    return topic.subscribers.size();
}

TopicBus::Topic& TopicBus::find_topic(const std::string& name) const {
    std::lock_guard lock(registry_mutex_);
    auto it = topics_.find(name);
    if (it == topics_.end()) throw Error(Errc::unknown_topic, "'" + name + "'");
    return *it->second;
}

Publisher TopicBus::make_publisher(const std::string& topic, const std::string& publisher_id) {
    find_topic(topic); // existence check
    return Publisher(this, topic, publisher_id);
}

TopicEnvelope TopicBus::publish(const std::string& topic_name, const std::string& publisher_id,
                                Payload payload) {
    Topic& topic = find_topic(topic_name);
    if (kind_of(payload) != topic.kind) {
        throw Error(Errc::schema_mismatch,
                    "topic '" + topic_name + "' carries " +
                        record_kind_name(topic.kind) + ", got " +
                        record_kind_name(kind_of(payload)));
    }

    std::lock_guard lock(topic.mutex);
    TopicEnvelope env;
    env.topic_name = topic_name;
    env.publisher_id = publisher_id;
    env.sequence = topic.next_sequence[publisher_id]++;
    // publish_ts is non-decreasing per publisher even if the clock steps back.
    TimestampMs now = options_.clock();
    auto& last = topic.last_publish_ts[publisher_id];
    env.publish_ts = std::max(now, last);
    last = env.publish_ts;
    env.payload = std::move(payload);

    for (const auto& sub : topic.subscribers) sub->deliver(env);
    return env;
}

SubscriberPtr TopicBus::subscribe(const std::string& topic_name,
                                  const std::string& subscriber_id) {
    Topic& topic = find_topic(topic_name);
    std::lock_guard lock(topic.mutex);
    SubscriberPtr sub(new Subscriber(topic_name, subscriber_id, options_.high_water_mark));
    topic.subscribers.push_back(sub);
    return sub;
}

} // namespace banfusion
