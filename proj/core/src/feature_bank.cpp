#include "streambank/feature_bank.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "streambank/errors.hpp"

namespace streambank {

void BankConfig::validate() const {
    if (capacity_frames < 1) {
        throw ConfigError("bank: capacity_frames must be >= 1");
    }
    if (policy == BankPolicy::DynamicMerge && capacity_frames != 1) {
        throw ConfigError("bank: dynamic merge supports capacity_frames == 1 only");
    }
    if (update_interval < 1) {
        throw ConfigError("bank: update_interval must be >= 1");
    }
}

FeatureBank::FeatureBank(const BankConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
}

std::pair<int, int> FeatureBank::map_key(int step, int layer) const {
    return cfg_.share_across_steps ? std::make_pair(0, layer) : std::make_pair(step, layer);
}

FeatureTriple FeatureBank::fetch(int step, int layer) const {
    auto it = entries_.find(map_key(step, layer));
    if (it == entries_.end()) {
        Matrix empty(0, dim_hint_);
        return FeatureTriple{empty, empty, empty};
    }
    return it->second.feats;
}

bool FeatureBank::maybe_update(const FrameFeatures& feats) {
    if (cfg_.policy == BankPolicy::None) {
        return false;
    }
    if (feats.frame_index < 0 || feats.frame_index % cfg_.update_interval != 0) {
        return false;
    }
    update(feats);
    return true;
}

void FeatureBank::update(const FrameFeatures& feats) {
    switch (cfg_.policy) {
    case BankPolicy::None:
        return;
    case BankPolicy::Queue:
        queue_update(feats);
        return;
    case BankPolicy::DynamicMerge:
        dyme_update(feats, cfg_.strategy);
        return;
    }
}

void FeatureBank::check_dims(const FeatureTriple& t) const {
    if (!t.k.same_shape(t.v) || !t.k.same_shape(t.o)) {
        throw ShapeError("bank: K, V, O must share shape");
    }
    if (t.k.rows() == 0 || t.k.cols() == 0) {
        throw ShapeError("bank: features must be non-empty");
    }
    if (dim_hint_ != 0 && t.k.cols() != dim_hint_) {
        throw ShapeError("bank: feature dim does not match stored entries");
    }
}

std::map<std::pair<int, int>, const FeatureTriple*>
FeatureBank::select_features(const FrameFeatures& feats) const {
    std::map<std::pair<int, int>, const FeatureTriple*> out;
    if (!cfg_.share_across_steps) {
        for (const auto& [key, triple] : feats.features) {
            out[key] = &triple;
        }
        return out;
    }
    // One shared entry per layer, fed by the shallowest step present (the
    // most-denoised pass of the frame).
    for (const auto& [key, triple] : feats.features) {
        const auto& [step, layer] = key;
        auto it = out.find({0, layer});
        if (it == out.end()) {
            out[{0, layer}] = &triple;
        } else {
            // keys iterate in ascending step order, so the first wins
            (void)step;
        }
    }
    return out;
}

void FeatureBank::queue_update(const FrameFeatures& feats) {
    for (const auto& [key, triple] : select_features(feats)) {
        check_dims(*triple);
        dim_hint_ = triple->k.cols();
        queue_insert(entries_[key], *triple);
    }
}

namespace {

Matrix drop_front_rows(const Matrix& m, std::size_t count) {
    Matrix out(m.rows() - count, m.cols());
    std::copy(m.values().begin() + count * m.cols(), m.values().end(), out.values().begin());
    return out;
}

} // namespace

void FeatureBank::queue_insert(Entry& entry, const FeatureTriple& t) {
    if (entry.frame_rows.empty()) {
        entry.feats = t;
    } else {
        if (entry.feats.k.cols() != t.k.cols()) {
            throw ShapeError("bank: feature dim does not match stored entries");
        }
        entry.feats.k = concat_rows(entry.feats.k, t.k);
        entry.feats.v = concat_rows(entry.feats.v, t.v);
        entry.feats.o = concat_rows(entry.feats.o, t.o);
    }
    entry.frame_rows.push_back(t.k.rows());
    while (entry.frame_rows.size() > static_cast<std::size_t>(cfg_.capacity_frames)) {
        std::size_t evicted = entry.frame_rows.front();
        entry.frame_rows.pop_front();
        entry.feats.k = drop_front_rows(entry.feats.k, evicted);
        entry.feats.v = drop_front_rows(entry.feats.v, evicted);
        entry.feats.o = drop_front_rows(entry.feats.o, evicted);
    }
}

void FeatureBank::dyme_update(const FrameFeatures& feats, SamplingStrategy strategy) {
    // std::map iteration keeps the (step, layer) visit order deterministic,
    // which pins the permutation draws of the Random strategy.
    for (const auto& [key, triple] : select_features(feats)) {
        check_dims(*triple);
        dim_hint_ = triple->k.cols();
        merge_insert(entries_[key], *triple, strategy);
    }
}

void FeatureBank::merge_insert(Entry& entry, const FeatureTriple& t, SamplingStrategy strategy) {
    if (entry.frame_rows.empty()) {
        entry.feats = t; // bootstrap: adopt the first frame verbatim
        entry.frame_rows.push_back(t.k.rows());
        return;
    }
    const std::size_t n = t.k.rows();
    if (entry.feats.k.rows() != n) {
        throw ShapeError("bank: merge requires incoming rows to match stored rows");
    }

    // Current frame first, stored rows after, mirroring the fetch-time concat.
    Matrix all_k = concat_rows(t.k, entry.feats.k);
    Matrix all_v = concat_rows(t.v, entry.feats.v);
    Matrix all_o = concat_rows(t.o, entry.feats.o);

    std::vector<std::uint32_t> src, dst;
    src.reserve(n);
    dst.reserve(n);
    switch (strategy) {
    case SamplingStrategy::Random: {
        std::vector<std::uint32_t> perm = rng_.permutation(static_cast<std::uint32_t>(2 * n));
        src.assign(perm.begin(), perm.begin() + n);
        dst.assign(perm.begin() + n, perm.end());
        break;
    }
    case SamplingStrategy::UniformGrid:
        for (std::uint32_t i = 0; i < 2 * n; i += 2) {
            src.push_back(i);
            dst.push_back(i + 1);
        }
        break;
    case SamplingStrategy::Split:
        for (std::uint32_t i = 0; i < n; ++i) {
            dst.push_back(i);     // current frame
            src.push_back(i + n); // stored rows
        }
        break;
    }

    // Match each source row to its most-similar destination row by key
    // cosine; ties go to the lowest destination index.  The matching is
    // fixed before any averaging mutates the destination rows.
    Matrix sims = cosine_sim_matrix(gather_rows(all_k, src), gather_rows(all_k, dst));
    std::vector<std::size_t> match(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        float best = sims(i, 0);
        for (std::size_t j = 1; j < n; ++j) {
            if (sims(i, j) > best) {
                best = sims(i, j);
                match[i] = j;
            }
        }
    }

    FeatureTriple merged{gather_rows(all_k, dst), gather_rows(all_v, dst), gather_rows(all_o, dst)};
    Matrix src_k = gather_rows(all_k, src);
    Matrix src_v = gather_rows(all_v, src);
    Matrix src_o = gather_rows(all_o, src);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = match[i];
        for (std::size_t c = 0; c < merged.k.cols(); ++c) {
            merged.k(j, c) = (merged.k(j, c) + src_k(i, c)) / 2.0f;
            merged.v(j, c) = (merged.v(j, c) + src_v(i, c)) / 2.0f;
            merged.o(j, c) = (merged.o(j, c) + src_o(i, c)) / 2.0f;
        }
    }
    entry.feats = std::move(merged);
    entry.frame_rows.assign(1, n);
}

std::size_t FeatureBank::stored_rows(int step, int layer) const {
    auto it = entries_.find(map_key(step, layer));
    return it == entries_.end() ? 0 : it->second.feats.k.rows();
}

std::size_t FeatureBank::max_rows_per_key() const {
    std::size_t best = 0;
    for (const auto& [key, entry] : entries_) {
        (void)key;
        best = std::max(best, entry.feats.k.rows());
    }
    return best;
}

std::size_t FeatureBank::total_floats() const {
    std::size_t total = 0;
    for (const auto& [key, entry] : entries_) {
        (void)key;
        total += entry.feats.k.size() + entry.feats.v.size() + entry.feats.o.size();
    }
    return total;
}

std::vector<std::pair<int, int>> FeatureBank::keys() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(entries_.size());
    for (const auto& [key, entry] : entries_) {
        (void)entry;
        out.push_back(key);
    }
    return out;
}

void FeatureBank::export_snapshot(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["entries"] = nlohmann::ordered_json::array();
    for (const auto& [key, entry] : entries_) {
        const auto& [step, layer] = key;
        std::string stem = "s" + std::to_string(step) + "_l" + std::to_string(layer);
        std::string k_file = "k_" + stem + ".sbnk";
        std::string v_file = "v_" + stem + ".sbnk";
        std::string o_file = "o_" + stem + ".sbnk";
        write_matrix(dir / k_file, entry.feats.k);
        write_matrix(dir / v_file, entry.feats.v);
        write_matrix(dir / o_file, entry.feats.o);
        nlohmann::ordered_json item;
        item["step"] = step;
        item["layer"] = layer;
        item["rows"] = entry.feats.k.rows();
        item["cols"] = entry.feats.k.cols();
        item["files"] = {{"K", k_file}, {"V", v_file}, {"O", o_file}};
        manifest["entries"].push_back(item);
    }
    std::ofstream out(dir / "manifest.json");
    if (!out) {
        throw ConfigError("bank: cannot write manifest under " + dir.string());
    }
    out << manifest.dump(2) << "\n";
}

std::pair<BankPolicy, int> parse_bank_arm(const std::string& arm) {
    if (arm == "none") {
        return {BankPolicy::None, 0};
    }
    auto parse_count = [&](const std::string& prefix) -> int {
        std::string tail = arm.substr(prefix.size());
        if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos) {
            throw ConfigError("bank: bad arm \"" + arm + "\"");
        }
        return std::stoi(tail);
    };
    if (arm.rfind("queue:", 0) == 0) {
        int k = parse_count("queue:");
        if (k < 1) {
            throw ConfigError("bank: queue capacity must be >= 1");
        }
        return {BankPolicy::Queue, k};
    }
    if (arm.rfind("dyme:", 0) == 0) {
        int k = parse_count("dyme:");
        if (k != 1) {
            throw ConfigError("bank: dyme capacity must be 1");
        }
        return {BankPolicy::DynamicMerge, 1};
    }
    throw ConfigError("bank: unknown arm \"" + arm + "\" (expected none, queue:<k> or dyme:1)");
}

std::string bank_arm_string(const BankConfig& cfg) {
    switch (cfg.policy) {
    case BankPolicy::None:
        return "none";
    case BankPolicy::Queue:
        return "queue:" + std::to_string(cfg.capacity_frames);
    case BankPolicy::DynamicMerge:
        return "dyme:" + std::to_string(cfg.capacity_frames);
    }
    return "none";
}

SamplingStrategy parse_strategy(const std::string& name) {
    if (name == "random") {
        return SamplingStrategy::Random;
    }
    if (name == "uniform_grid") {
        return SamplingStrategy::UniformGrid;
    }
    if (name == "split") {
        return SamplingStrategy::Split;
    }
    throw ConfigError("bank: unknown strategy \"" + name + "\"");
}

std::string strategy_string(SamplingStrategy strategy) {
    switch (strategy) {
    case SamplingStrategy::Random:
        return "random";
    case SamplingStrategy::UniformGrid:
        return "uniform_grid";
    case SamplingStrategy::Split:
        return "split";
    }
    return "random";
}

} // namespace streambank
