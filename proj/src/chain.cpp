#include "bflsim/chain.hpp"

#include <openssl/sha.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "bflsim/rng.hpp"

namespace bflsim::chain {

namespace {

void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64_le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

void put_f64_le(std::vector<std::uint8_t>& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64_le(out, bits);
}

double get_f64_le(const std::uint8_t* p) {
    const std::uint64_t bits = get_u64_le(p);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

}  // namespace

std::vector<std::uint8_t> Payload::serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(9 + 8 * values.size());
    out.push_back(static_cast<std::uint8_t>(role));
    put_u64_le(out, values.size());
    for (double v : values) put_f64_le(out, v);
    return out;
}

Payload Payload::deserialize(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 9) throw std::runtime_error("Payload::deserialize: truncated");
    Payload p;
    p.role = static_cast<PayloadRole>(bytes[0]);
    const std::uint64_t dim = get_u64_le(bytes.data() + 1);
    if (bytes.size() != 9 + 8 * dim) throw std::runtime_error("Payload::deserialize: length mismatch");
    p.values.resize(dim);
    for (std::uint64_t i = 0; i < dim; ++i) p.values[i] = get_f64_le(bytes.data() + 9 + 8 * i);
    return p;
}

Digest block_digest(std::uint64_t index, const Digest& prev, const Payload& payload,
                    std::uint64_t tx_count, std::uint64_t miner) {
    std::vector<std::uint8_t> buf;
    put_u64_le(buf, index);
    buf.insert(buf.end(), prev.begin(), prev.end());
    const auto body = payload.serialize();
    put_u64_le(buf, body.size());
    buf.insert(buf.end(), body.begin(), body.end());
    put_u64_le(buf, tx_count);
    put_u64_le(buf, miner);

    Digest d{};
    SHA256(buf.data(), buf.size(), d.data());
    return d;
}

std::string hex(const Digest& d) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (std::uint8_t b : d) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

Block make_block(const Payload& payload, const Ledger& prev, std::uint64_t miner,
                 std::uint64_t tx_count) {
    Block b;
    b.index = prev.blocks.size();
    if (!prev.empty()) b.prev_digest = prev.tip().digest;
    b.payload = payload;
    b.tx_count = tx_count;
    b.miner = miner;
    b.digest = block_digest(b.index, b.prev_digest, b.payload, b.tx_count, b.miner);
    return b;
}

bool verify_chain(const Ledger& ledger) {
    Digest prev{};
    for (std::size_t i = 0; i < ledger.blocks.size(); ++i) {
        const Block& b = ledger.blocks[i];
        if (b.index != i) return false;
        if (b.prev_digest != prev) return false;
        if (block_digest(b.index, b.prev_digest, b.payload, b.tx_count, b.miner) != b.digest)
            return false;
        prev = b.digest;
    }
    return true;
}

MineResult mine_race(const std::vector<double>& per_md_t_mine) {
    if (per_md_t_mine.empty()) throw std::invalid_argument("mine_race: no eligible miner");
    MineResult r;
    r.winner = 0;
    r.t_mine = per_md_t_mine[0];
    for (std::size_t n = 1; n < per_md_t_mine.size(); ++n) {
        if (per_md_t_mine[n] < r.t_mine) {
            r.winner = n;
            r.t_mine = per_md_t_mine[n];
        }
    }
    return r;
}

Vec poison_model(const Vec& w, double scale, std::uint64_t seed) {
    if (scale < 0.0) throw std::invalid_argument("poison_model: scale >= 0 required");
    Rng rng = Rng::stream(seed, 0, 0, "poison");
    Vec out = w;
    for (auto& v : out) v -= scale * rng.normal();
    return out;
}

std::set<std::size_t> detect_poison(const std::vector<std::vector<double>>& update_norm_history,
                                    std::size_t window, double z_threshold) {
    std::set<std::size_t> flagged;
    for (std::size_t es = 0; es < update_norm_history.size(); ++es) {
        const auto& hist = update_norm_history[es];
        if (hist.size() < 3) continue;  // warm-up: need >= 2 prior observations
        const double current = hist.back();
        const std::size_t prior = hist.size() - 1;
        const std::size_t use = std::min(window, prior);
        if (use < 2) continue;
        double mean = 0.0;
        for (std::size_t i = prior - use; i < prior; ++i) mean += hist[i];
        mean /= static_cast<double>(use);
        double var = 0.0;
        for (std::size_t i = prior - use; i < prior; ++i)
            var += (hist[i] - mean) * (hist[i] - mean);
        var /= static_cast<double>(use - 1);
        const double sd = std::sqrt(var);
        if (current > mean + z_threshold * sd) flagged.insert(es);
    }
    return flagged;
}

void Ledger::export_jsonl(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Ledger::export_jsonl: cannot open " + path);
    for (const auto& b : blocks) {
        out << "{\"index\":" << b.index << ",\"prev_digest\":\"" << hex(b.prev_digest)
            << "\",\"role\":" << static_cast<int>(b.payload.role)
            << ",\"payload_dim\":" << b.payload.values.size() << ",\"tx_count\":" << b.tx_count
            << ",\"miner\":" << b.miner << ",\"digest\":\"" << hex(b.digest) << "\"}\n";
    }
}

}  // namespace bflsim::chain
