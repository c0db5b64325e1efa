#include "banfusion/storage.hpp"

#include <chrono>
#include <fstream>

namespace banfusion {

namespace {

TimestampMs system_now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

bool is_batchable(RecordKind kind) {
    return kind == RecordKind::rr || kind == RecordKind::gps || kind == RecordKind::hrv;
}

} // namespace

Store::Store(std::filesystem::path dir, std::function<TimestampMs()> clock)
    : dir_(std::move(dir)), clock_(std::move(clock)) {
    if (!clock_) clock_ = system_now_ms;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(Errc::io_error, "cannot create '" + dir_.string() + "': " + ec.message());
    load_existing();
}

std::string Store::shelf_id(const std::string& device_id, RecordKind kind) {
    return device_id + "." + record_kind_name(kind);
}

std::filesystem::path Store::file_for(const std::string& device_id, RecordKind kind) const {
    return dir_ / (shelf_id(device_id, kind) + ".jsonl");
}

void Store::load_existing() {
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        // <device_id>.<kind>.jsonl
        if (!name.ends_with(".jsonl")) continue;
        const std::string stem = name.substr(0, name.size() - 6);
        const auto dot = stem.rfind('.');
        if (dot == std::string::npos) continue;
        const std::string device_id = stem.substr(0, dot);
        RecordKind kind;
        try {
            kind = record_kind_from_string(stem.substr(dot + 1));
        } catch (const Error&) {
            continue; // not a store file
        }
        if (!is_batchable(kind)) continue;

        std::ifstream in(entry.path());
        std::string line;
        Shelf& shelf = shelves_[shelf_id(device_id, kind)];
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                throw Error(Errc::malformed_record,
                            "corrupt line in '" + entry.path().string() + "'");
            }
            BatchRecord record = batch_record_from_json(kind, j);
            shelf.records.emplace(record_key(record), std::move(record));
        }
    }
}

MergeResult Store::merge_batch(const SyncBatch& batch) {
    // validate everything first so a malformed record leaves the store untouched
    for (const auto& record : batch.records) {
        if (device_of(record) != batch.device_id) {
            throw Error(Errc::malformed_record,
                        "record device '" + device_of(record) + "' does not match batch device '" +
                            batch.device_id + "'");
        }
        if (auto msg = validate(record)) throw Error(Errc::malformed_record, *msg);
    }

    MergeResult result;
    const TimestampMs received = clock_();
    std::map<std::string, std::ofstream> appenders;
    for (const auto& record : batch.records) {
        const RecordKind kind = kind_of(record);
        const std::string id = shelf_id(batch.device_id, kind);
        Shelf& shelf = shelves_[id];
        auto [it, inserted] = shelf.records.try_emplace(record_key(record), record);
        if (!inserted) {
            ++result.duplicates;
            continue;
        }
        ++result.inserted;
        received_at_[id] = received;
        auto [ait, fresh] = appenders.try_emplace(id);
        if (fresh) {
            ait->second.open(file_for(batch.device_id, kind), std::ios::app);
            if (!ait->second.is_open()) {
                throw Error(Errc::io_error,
                            "cannot append to '" + file_for(batch.device_id, kind).string() + "'");
            }
        }
        ait->second << encode_line(record) << '\n';
    }
    for (auto& [_, out] : appenders) {
        out.flush();
        if (!out.good()) throw Error(Errc::io_error, "write failure in '" + dir_.string() + "'");
    }
    return result;
}

std::vector<BatchRecord> Store::query(const std::string& device_id, RecordKind kind,
                                      TimestampMs from, TimestampMs to) const {
    if (!is_batchable(kind)) {
        throw Error(Errc::unknown_kind,
                    std::string(record_kind_name(kind)) + " records are not stored");
    }
    std::vector<BatchRecord> out;
    auto it = shelves_.find(shelf_id(device_id, kind));
    if (it == shelves_.end()) return out;
    for (const auto& [key, record] : it->second.records) {
        const TimestampMs ts = primary_ts(record);
        if (ts >= from && ts <= to) out.push_back(record);
    }
    return out;
}

std::vector<BatchRecord> Store::query(const std::string& device_id, const std::string& kind,
                                      TimestampMs from, TimestampMs to) const {
    return query(device_id, record_kind_from_string(kind), from, to);
}

void Store::flush() {
    // appends are flushed eagerly in merge_batch
}

std::size_t Store::record_count() const {
    std::size_t n = 0;
    for (const auto& [_, shelf] : shelves_) n += shelf.records.size();
    return n;
}

} // namespace banfusion
