#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "streambank/matrix.hpp"
#include "streambank/rng.hpp"

namespace streambank {

enum class BankPolicy {
    None,         // bank disabled; fetch always returns empty matrices
    Queue,        // keep the last capacity_frames frames, FIFO eviction
    DynamicMerge, // fixed one-frame footprint; new rows merged into stored rows
};

// How the dynamic-merge policy splits the 2N concatenated rows (current frame
// first, then stored) into N source rows and N destination rows.
enum class SamplingStrategy {
    Random,      // seeded permutation; first half is the source
    UniformGrid, // even concatenated indices are the source, odd the destination
    Split,       // current rows are the destination, stored rows the source
};

struct BankConfig {
    BankPolicy policy = BankPolicy::None;
    int capacity_frames = 1; // queue depth; dynamic merge requires exactly 1
    int update_interval = 4; // accept features every Nth frame
    SamplingStrategy strategy = SamplingStrategy::Random;
    bool share_across_steps = false; // collapse the step axis of the key space
    std::uint64_t seed = 1;

    void validate() const;
};

struct FeatureTriple {
    Matrix k;
    Matrix v;
    Matrix o;
};

// One frame's captured features, keyed by (denoise step, layer).
struct FrameFeatures {
    long frame_index = -1;
    std::map<std::pair<int, int>, FeatureTriple> features;
};

// Persistent K/V/O storage shared across frames, keyed by (step, layer); the
// attention path reads K/V and the fusion path reads O.  All mutation happens
// through the update entry points, so fetches within a pipeline tick observe
// a stable snapshot.
class FeatureBank {
public:
    FeatureBank() : FeatureBank(BankConfig{}) {}
    explicit FeatureBank(const BankConfig& cfg);

    const BankConfig& config() const { return cfg_; }

    // Stored matrices for a key; empty (0 x dim) before any insertion.
    FeatureTriple fetch(int step, int layer) const;

    // Applies the configured policy when feats.frame_index is a non-negative
    // multiple of the update interval.  Returns whether an update ran.
    bool maybe_update(const FrameFeatures& feats);

    // Unconditional policy dispatch (no-op for BankPolicy::None).
    void update(const FrameFeatures& feats);

    // Appends a frame per key and evicts the oldest frame beyond capacity.
    void queue_update(const FrameFeatures& feats);

    // Merges the incoming rows into the stored rows, keeping the row count
    // fixed: concatenate current + stored (2N rows), partition into source
    // and destination halves per the strategy, match each source row to its
    // most-similar destination row by key cosine, then average the pairs in
    // ascending source order.  The partition and matching are computed once
    // per key from K and reused for K, V and O so the triple stays aligned.
    // The first update of a key adopts the features verbatim.
    void dyme_update(const FrameFeatures& feats, SamplingStrategy strategy);

    std::size_t stored_rows(int step, int layer) const;
    std::size_t max_rows_per_key() const;
    std::size_t total_floats() const;
    std::vector<std::pair<int, int>> keys() const;

    // Writes one binary matrix file per (step, layer, tensor) plus a
    // manifest.json listing every key.
    void export_snapshot(const std::filesystem::path& dir) const;

private:
    struct Entry {
        std::deque<std::size_t> frame_rows; // rows contributed by each stored frame
        FeatureTriple feats;
    };

    std::pair<int, int> map_key(int step, int layer) const;
    std::map<std::pair<int, int>, const FeatureTriple*>
    select_features(const FrameFeatures& feats) const;
    void check_dims(const FeatureTriple& t) const;
    void queue_insert(Entry& entry, const FeatureTriple& t);
    void merge_insert(Entry& entry, const FeatureTriple& t, SamplingStrategy strategy);

    BankConfig cfg_;
    Rng rng_;
    std::map<std::pair<int, int>, Entry> entries_;
    std::size_t dim_hint_ = 0;
};

// Bank arm tokens used by configs and reports: "none", "queue:<k>", "dyme:1".
std::pair<BankPolicy, int> parse_bank_arm(const std::string& arm);
std::string bank_arm_string(const BankConfig& cfg);

SamplingStrategy parse_strategy(const std::string& name);
std::string strategy_string(SamplingStrategy strategy);

} // namespace streambank
