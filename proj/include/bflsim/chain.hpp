#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bflsim/vec.hpp"

namespace bflsim::chain {

using Digest = std::array<std::uint8_t, 32>;

enum class PayloadRole : std::uint8_t {
    global_model = 0,
    md_gradient = 1,
    es_gradient = 2,
};

struct Payload {
    PayloadRole role = PayloadRole::global_model;
    Vec values;

    // Length-prefixed canonical little-endian bytes: role u8, dim u64 LE,
    // then IEEE-754 doubles LE.
    std::vector<std::uint8_t> serialize() const;
    static Payload deserialize(const std::vector<std::uint8_t>& bytes);
};

struct Block {
    std::uint64_t index = 0;
    Digest prev_digest{};  // all-zero for genesis
    Payload payload;
    std::uint64_t tx_count = 0;
    std::uint64_t miner = 0;
    Digest digest{};
};

struct Ledger {
    std::vector<Block> blocks;
    // Per global round: per-ES fastest mining latency, feeds leader selection.
    std::vector<std::vector<double>> winner_latency;

    bool empty() const { return blocks.empty(); }
    const Block& tip() const { return blocks.back(); }
    void export_jsonl(const std::string& path) const;
};

// SHA-256 over the canonical block encoding (index, prev, payload, tx, miner).
Digest block_digest(std::uint64_t index, const Digest& prev, const Payload& payload,
                    std::uint64_t tx_count, std::uint64_t miner);

std::string hex(const Digest& d);

// Builds (but does not append) the next block on `prev`; genesis when empty.
Block make_block(const Payload& payload, const Ledger& prev, std::uint64_t miner,
                 std::uint64_t tx_count);

bool verify_chain(const Ledger& ledger);

struct MineResult {
    std::size_t winner = 0;
    double t_mine = 0.0;
};

// argmin of per-MD mining latency; ties resolve to the lowest index.
MineResult mine_race(const std::vector<double>& per_md_t_mine);

// w - scale * q with q ~ N(0, I), deterministic per seed.
Vec poison_model(const Vec& w, double scale, std::uint64_t seed);

struct AttackSpec {
    std::size_t attacked_es = 0;
    std::set<std::size_t> rounds;
    double scale = 0.0;  // varpi
    std::uint64_t noise_seed = 0;

    bool active(std::size_t round) const { return scale > 0.0 && rounds.count(round) > 0; }
};

// z-score anomaly flags over per-ES update-norm histories.  The window is
// the `window` observations preceding the latest one; fewer than 2 prior
// observations means warm-up (no flag).
std::set<std::size_t> detect_poison(const std::vector<std::vector<double>>& update_norm_history,
                                    std::size_t window, double z_threshold);

}  // namespace bflsim::chain
