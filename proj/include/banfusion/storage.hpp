/**
 * @file storage.hpp
 * @brief Central append-only record store with idempotent sync-batch merging.
 *
 * Backing format is one JSONL file per (device_id, kind) under a data
 * directory, named <device_id>.<kind>.jsonl. An in-memory key index is
 * rebuilt on open; each Store instance sees a consistent snapshot as of its
 * open plus its own writes (single writer, multiple readers).
 */

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "banfusion/records.hpp"

namespace banfusion {

struct MergeResult {
    std::size_t inserted = 0;
    std::size_t duplicates = 0;
};

class Store {
public:
    /// Opens (creating if needed) a store rooted at dir and rebuilds the key
    /// index from the JSONL files found there.
    explicit Store(std::filesystem::path dir,
                   std::function<TimestampMs()> clock = {});

    /// Merges a batch. Records with new (device, kind, key) are appended;
    /// existing keys are counted as duplicates. A malformed record rejects the
    /// whole batch and leaves the store untouched. Merging the same batch
    /// twice is a no-op the second time.
    MergeResult merge_batch(const SyncBatch& batch);

    /// All records of (device_id, kind) whose primary timestamp lies in
    /// [from, to], ordered by primary timestamp. Throws unknown_kind for
    /// non-batchable kinds.
    std::vector<BatchRecord> query(const std::string& device_id, RecordKind kind,
                                   TimestampMs from, TimestampMs to) const;
    std::vector<BatchRecord> query(const std::string& device_id, const std::string& kind,
                                   TimestampMs from, TimestampMs to) const;

    /// Flushes nothing extra (appends are written eagerly); kept as the
    /// explicit durability point for callers that batch merges.
    void flush();

    std::size_t record_count() const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    struct Shelf {
        // key -> record; keys are monotone with the primary timestamp, so
        // iteration order is query order
        std::map<std::int64_t, BatchRecord> records;
    };

    static std::string shelf_id(const std::string& device_id, RecordKind kind);
    std::filesystem::path file_for(const std::string& device_id, RecordKind kind) const;
    void load_existing();

    std::filesystem::path dir_;
    std::function<TimestampMs()> clock_;
    std::map<std::string, Shelf> shelves_;
    std::map<std::string, TimestampMs> received_at_; // in-memory metadata only
};

} // namespace banfusion
