#include "sienna/pairing.hpp"

#include "sienna/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <ostream>

namespace sienna {

namespace {

constexpr std::uint8_t kdf_domain = 0x02;
constexpr std::array<std::uint8_t, 4> message_magic{'S', 'N', 'N', 'A'};
constexpr std::size_t message_header = 6;

enum class MessageType : std::uint8_t { init = 1, commit = 2, ack_nak = 3 };

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint64_t get_be(std::span<const std::uint8_t> b)
{
    std::uint64_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
}

void put_field(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> field)
{
    put_u32(out, static_cast<std::uint32_t>(field.size()));
    out.insert(out.end(), field.begin(), field.end());
}

class FieldReader {
public:
    explicit FieldReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::span<const std::uint8_t> next(std::size_t expected_len, const char* name)
    {
        require(bytes_.size() - pos_ >= 4, std::string("decode_message: truncated length of ") + name);
        const auto len = static_cast<std::size_t>(get_be(bytes_.subspan(pos_, 4)));
        pos_ += 4;
        require(bytes_.size() - pos_ >= len, std::string("decode_message: truncated field ") + name);
        require(expected_len == 0 || len == expected_len, std::string("decode_message: bad length for ") + name);
        auto f = bytes_.subspan(pos_, len);
        pos_ += len;
        return f;
    }

    void finish() const { require(pos_ == bytes_.size(), "decode_message: trailing bytes"); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = message_header;
};

Digest to_digest(std::span<const std::uint8_t> b)
{
    Digest d{};
    std::copy(b.begin(), b.end(), d.begin());
    return d;
}

} // namespace

Digest bootstrap_key_hash()
{
    const auto* p = reinterpret_cast<const std::uint8_t*>(bootstrap_parameter.data());
    return hash256_bytes({p, bootstrap_parameter.size()});
}

Digest key_hash(const Key& k)
{
    return hash256_bytes(k);
}

Key kdf(const Key& k, const Salt& s)
{
    std::vector<std::uint8_t> buf{kdf_domain};
    buf.insert(buf.end(), k.begin(), k.end());
    const auto bytes = s.bits.to_bytes();
    buf.insert(buf.end(), bytes.begin(), bytes.end());
    return hash256_bytes(buf);
}

Key kdf(const std::optional<Key>& k, const Salt& s)
{
    return kdf(k ? *k : bootstrap_key_hash(), s);
}

InitMessage make_init(const Digest& key_hash, std::uint64_t t_str_ms, std::uint64_t t_end_ms)
{
    require(t_end_ms > t_str_ms, "init message: t_end must be after t_str");
    return InitMessage{key_hash, t_str_ms, t_end_ms};
}

std::vector<std::uint8_t> encode_message(const Message& m, const RsCodeSpec& spec)
{
    std::vector<std::uint8_t> out(message_magic.begin(), message_magic.end());
    out.push_back(message_wire_version);
    std::vector<std::uint8_t> tmp;
    if (const auto* init = std::get_if<InitMessage>(&m)) {
        require(init->t_end_ms > init->t_str_ms, "encode_message: t_end must be after t_str");
        out.push_back(static_cast<std::uint8_t>(MessageType::init));
        put_field(out, init->key_hash);
        put_u64(tmp, init->t_str_ms);
        put_field(out, tmp);
        tmp.clear();
        put_u64(tmp, init->t_end_ms);
        put_field(out, tmp);
    } else if (const auto* c = std::get_if<CommitMessage>(&m)) {
        out.push_back(static_cast<std::uint8_t>(MessageType::commit));
        put_u32(tmp, c->level_index);
        put_field(out, tmp);
        put_field(out, serialize_commitment(c->commitment, spec));
    } else {
        const auto& v = std::get<AckNak>(m);
        out.push_back(static_cast<std::uint8_t>(MessageType::ack_nak));
        tmp.push_back(static_cast<std::uint8_t>(v.verdict));
        put_field(out, tmp);
        tmp.clear();
        put_u32(tmp, v.level_index);
        put_field(out, tmp);
    }
    return out;
}

Message decode_message(std::span<const std::uint8_t> bytes, const RsCodeSpec& spec)
{
    require(bytes.size() >= message_header, "decode_message: truncated header");
    require(std::equal(message_magic.begin(), message_magic.end(), bytes.begin()), "decode_message: bad magic");
    require(bytes[4] == message_wire_version, "decode_message: unsupported version");
    FieldReader r(bytes);
    switch (static_cast<MessageType>(bytes[5])) {
    case MessageType::init: {
        InitMessage m;
        m.key_hash = to_digest(r.next(32, "key_hash"));
        m.t_str_ms = get_be(r.next(8, "t_str"));
        m.t_end_ms = get_be(r.next(8, "t_end"));
        r.finish();
        require(m.t_end_ms > m.t_str_ms, "decode_message: t_end must be after t_str");
        return m;
    }
    case MessageType::commit: {
        CommitMessage m;
        m.level_index = static_cast<std::uint32_t>(get_be(r.next(4, "level_index")));
        m.commitment = deserialize_commitment(r.next(0, "commitment"), spec);
        r.finish();
        return m;
    }
    case MessageType::ack_nak: {
        AckNak m;
        const auto v = r.next(1, "verdict")[0];
        require(v <= 1, "decode_message: unknown verdict");
        m.verdict = static_cast<Verdict>(v);
        m.level_index = static_cast<std::uint32_t>(get_be(r.next(4, "level_index")));
        r.finish();
        return m;
    }
    }
    throw SpecError("decode_message: unknown message type");
}

CommitLayout commit_layout(const RsCodeSpec& spec)
{
    CommitLayout l;
    // header, level field, commitment length prefix, SNCM header
    l.codeword_offset = message_header + (4 + 4) + 4 + 11;
    l.codeword_bytes = (spec.codeword_bits() + 7) / 8;
    l.digest_offset = l.codeword_offset + l.codeword_bytes;
    l.total_bytes = l.digest_offset + 32;
    return l;
}

std::string_view phase_name(Phase p)
{
    switch (p) {
    case Phase::idle: return "idle";
    case Phase::announced: return "announced";
    case Phase::committing: return "committing";
    case Phase::await_ack: return "await_ack";
    case Phase::done: return "done";
    case Phase::failed: return "failed";
    }
    return "?";
}

// ---- Session ----

Session::Session(Role role, std::optional<Key> key, std::shared_ptr<const ReedSolomon> code, std::size_t levels,
                 unsigned retry_budget)
    : role_(role), key_(key), code_(std::move(code)), levels_(levels), retry_budget_(retry_budget)
{
    require(code_ != nullptr, "session: no code");
    require(levels_ >= 1, "session: need at least one ladder level");
}

void Session::expect(Role r, std::initializer_list<Phase> allowed, const char* op) const
{
    if (role_ != r) throw ProtocolError(std::string(op) + ": not available to this role");
    if (std::find(allowed.begin(), allowed.end(), phase_) == allowed.end())
        throw ProtocolError(std::string(op) + ": not allowed in phase " + std::string(phase_name(phase_)));
}

InitMessage Session::initiate(std::uint64_t t_str_ms, std::uint64_t t_end_ms)
{
    expect(Role::a, {Phase::idle}, "initiate");
    auto m = make_init(key_ ? key_hash(*key_) : bootstrap_key_hash(), t_str_ms, t_end_ms);
    t_str_ms_ = t_str_ms;
    t_end_ms_ = t_end_ms;
    phase_ = Phase::announced;
    return m;
}

CommitMessage Session::commit_level(const Fingerprint& f, HashDrbg& drbg)
{
    expect(Role::a, {Phase::announced, Phase::committing}, "commit_level");
    require(f.bits.size() == code_->spec().codeword_bits(), "commit_level: fingerprint length");
    Salt s = random_salt(code_->spec(), drbg);
    Commitment c = commit(s, f, *code_);
    if (pending_.size() <= level_) pending_.push_back(LevelRecord{level_, 0, {}, {}, false});
    auto& rec = pending_[level_];
    ++rec.attempts;
    rec.sub_salt = std::move(s);
    rec.commitment = c;
    phase_ = Phase::await_ack;
    return CommitMessage{level_, std::move(c)};
}

void Session::on_verdict(const AckNak& v)
{
    expect(Role::a, {Phase::await_ack}, "on_verdict");
    if (v.level_index != level_) throw ProtocolError("on_verdict: verdict for another level");
    auto& rec = pending_[level_];
    if (v.verdict == Verdict::ack) {
        rec.acked = true;
        if (level_ + 1 == levels_) {
            finish();
        } else {
            ++level_;
            phase_ = Phase::committing;
        }
    } else if (rec.attempts > retry_budget_) {
        failure_ = FailureInfo{level_, "open"};
        phase_ = Phase::failed;
    } else {
        phase_ = Phase::committing;
    }
}

void Session::on_init(const InitMessage& m)
{
    expect(Role::b, {Phase::idle}, "on_init");
    require(m.t_end_ms > m.t_str_ms, "on_init: t_end must be after t_str");
    t_str_ms_ = m.t_str_ms;
    t_end_ms_ = m.t_end_ms;
    const Digest expected = key_ ? key_hash(*key_) : bootstrap_key_hash();
    if (m.key_hash != expected) {
        failure_ = FailureInfo{0, "key_hash"};
        phase_ = Phase::failed;
        return;
    }
    phase_ = Phase::announced;
}

AckNak Session::record_attempt(std::uint32_t level, std::optional<Salt> opened, const Commitment* c,
                               const char* stage)
{
    if (pending_.size() <= level) pending_.push_back(LevelRecord{level, 0, {}, {}, false});
    auto& rec = pending_[level];
    ++rec.attempts;
    if (c) rec.commitment = *c;
    if (opened) {
        rec.sub_salt = std::move(*opened);
        rec.acked = true;
        if (level_ + 1 == levels_) {
            finish();
        } else {
            ++level_;
            phase_ = Phase::committing;
        }
        return AckNak{Verdict::ack, level};
    }
    if (rec.attempts > retry_budget_) {
        failure_ = FailureInfo{level, stage};
        phase_ = Phase::failed;
    } else {
        phase_ = Phase::committing;
    }
    return AckNak{Verdict::nak, level};
}

AckNak Session::on_commit(const CommitMessage& m, std::span<const Fingerprint> candidates)
{
    expect(Role::b, {Phase::announced, Phase::committing}, "on_commit");
    if (m.level_index != level_) throw ProtocolError("on_commit: unexpected level index");
    std::optional<Salt> best;
    std::size_t best_corrections = 0;
    for (const auto& f : candidates) {
        if (f.bits.size() != code_->spec().codeword_bits()) continue;
        auto o = open(m.commitment, f, *code_);
        if (o.recovered() && (!best || o.corrected_bits < best_corrections)) {
            best_corrections = o.corrected_bits;
            best = std::move(o.salt);
        }
    }
    return record_attempt(m.level_index, std::move(best), &m.commitment, "open");
}

AckNak Session::reject_commit(std::uint32_t level_index)
{
    expect(Role::b, {Phase::announced, Phase::committing}, "reject_commit");
    if (level_index != level_) throw ProtocolError("reject_commit: unexpected level index");
    return record_attempt(level_index, std::nullopt, nullptr, "frame");
}

void Session::finish()
{
    BitString acc = pending_.front().sub_salt.bits;
    for (std::size_t i = 1; i < pending_.size(); ++i) acc ^= pending_[i].sub_salt.bits;
    salt_ = Salt{std::move(acc)};
    key_ = kdf(key_, *salt_);
    phase_ = Phase::done;
}

// ---- run_pairing ----

namespace {

BitString bytes_to_bits(const std::vector<std::uint8_t>& b)
{
    return BitString::from_bytes(b);
}

double jam_level_power(const PairingConfig& cfg, const JammingLadder& ladder, std::size_t level)
{
    return cfg.jamming ? ladder.levels[level] : 0.0;
}

} // namespace

PairingOutcome run_pairing(const DeviceA& dev_a, const DeviceB& dev_b, const PairingConfig& cfg, std::uint64_t seed,
                           bool record_taps)
{
    cfg.channel.validate();
    cfg.qam.validate();
    auto code = std::make_shared<const ReedSolomon>(cfg.rs);
    const auto ladder = ladder_levels(cfg.channel.p_max, cfg.channel.p0);
    const std::size_t levels = ladder.count();
    const unsigned bps = cfg.qam.bits_per_symbol();

    Session a(Role::a, dev_a.key, code, levels, cfg.retry_budget);
    Session b(Role::b, dev_b.key, code, levels, cfg.retry_budget);
    HashDrbg drbg(seed, "pairing-salt");
    std::mt19937_64 mask_rng(mix_seed(seed, 0xA11));
    std::mt19937_64 legit_rng(mix_seed(seed, 0xB0B));
    std::mt19937_64 eve_rng(mix_seed(seed, 0xE7E));

    PairingOutcome out;
    double clock = static_cast<double>(cfg.t_end_ms) / 1000.0;
    const double control_airtime = 1e-3;
    auto log = [&](const char* dir, Message m, std::size_t bytes, double jam, double airtime) {
        out.transcript.push_back(TranscriptEntry{clock, dir, std::move(m), bytes, jam});
        clock += airtime;
    };

    const auto init = a.initiate(cfg.t_str_ms, cfg.t_end_ms);
    log("a->b", init, encode_message(init, cfg.rs).size(), 0, control_airtime);
    b.on_init(init);

    while (a.phase() != Phase::done && a.phase() != Phase::failed && b.phase() != Phase::failed) {
        const std::uint32_t level = a.current_level();
        const double jam = jam_level_power(cfg, ladder, level);
        const auto msg = a.commit_level(dev_a.fingerprint, drbg);
        const auto wire = encode_message(msg, cfg.rs);
        const BitString sent = bytes_to_bits(wire);
        const auto symbols = qam_modulate(sent, cfg.qam);
        // b draws a new mask for every transmission, retries included
        const auto mask = random_jam_mask(symbols.size(), mask_rng);
        ++out.commit_attempts;

        const LinkBudget legit{cfg.channel.p1, cfg.channel.p0, jam};
        const auto frame = dup_and_jam(symbols, mask, legit, bps, legit_rng);
        const auto stitched = receiver_stitch(frame, mask);
        const BitString got = qam_demodulate(stitched, cfg.qam).slice(0, sent.size());
        out.legit_bit_errors += hamming_distance(got, sent);
        log("a->b", msg, wire.size(), jam, static_cast<double>(2 * symbols.size()) / cfg.symbol_rate);

        if (record_taps) {
            const LinkBudget eve{cfg.channel.p2, cfg.channel.p0, jam};
            ChannelTap tap;
            tap.level_index = level;
            tap.attempt = a.pending()[level].attempts;
            tap.jam_power = jam;
            tap.frame = dup_and_jam(symbols, mask, eve, bps, eve_rng);
            tap.sent_bits = sent;
            tap.sub_salt = a.pending()[level].sub_salt;
            out.taps.push_back(std::move(tap));
        }

        AckNak verdict;
        const auto rx_bytes = got.to_bytes();
        std::optional<CommitMessage> parsed;
        try {
            auto m = decode_message(rx_bytes, cfg.rs);
            if (auto* c = std::get_if<CommitMessage>(&m); c && c->level_index == level) parsed = std::move(*c);
        } catch (const SpecError&) {
        }
        verdict = parsed ? b.on_commit(*parsed, dev_b.candidates) : b.reject_commit(level);
        if (record_taps) out.taps.back().acked = verdict.verdict == Verdict::ack;
        log("b->a", verdict, encode_message(verdict, cfg.rs).size(), 0, control_airtime);
        a.on_verdict(verdict);
    }

    if (b.phase() == Phase::failed) {
        out.failure = b.failure();
    } else if (a.phase() == Phase::failed) {
        out.failure = a.failure();
    }
    if (a.phase() == Phase::done && b.phase() == Phase::done) {
        out.key_a = a.key();
        out.key_b = b.key();
        out.salt = a.evolution_salt();
        out.success = *out.key_a == *out.key_b;
        if (!out.success) out.failure = FailureInfo{a.current_level(), "key_mismatch"};
    }
    return out;
}

void write_transcript_jsonl(std::ostream& os, const std::vector<TranscriptEntry>& transcript)
{
    for (const auto& e : transcript) {
        nlohmann::ordered_json j;
        j["t"] = e.time_s;
        j["dir"] = e.direction;
        j["bytes"] = e.wire_bytes;
        if (const auto* init = std::get_if<InitMessage>(&e.message)) {
            j["type"] = "init";
            j["key_hash"] = to_hex(init->key_hash);
            j["t_str_ms"] = init->t_str_ms;
            j["t_end_ms"] = init->t_end_ms;
        } else if (const auto* c = std::get_if<CommitMessage>(&e.message)) {
            j["type"] = "commit";
            j["level"] = c->level_index;
            j["jam_power"] = e.jam_power;
            j["salt_hash"] = to_hex(c->commitment.salt_hash);
        } else {
            const auto& v = std::get<AckNak>(e.message);
            j["type"] = v.verdict == Verdict::ack ? "ack" : "nak";
            j["level"] = v.level_index;
        }
        os << j.dump() << '\n';
    }
}

// ---- adversaries ----

namespace {

struct EveView {
    BitString codeword;
    Digest digest{};
    double ber = 0;
};

EveView demodulate_commit(const ChannelTap& tap, const RsCodeSpec& spec, const QamSpec& qam,
                          EavesdropStrategy strategy, std::mt19937_64& rng)
{
    const auto layout = commit_layout(spec);
    const auto res = eavesdrop(tap.frame, strategy, qam, tap.sent_bits, rng);
    const auto bytes = res.bits.slice(0, tap.sent_bits.size()).to_bytes();
    require(bytes.size() == layout.total_bytes, "attack: tap does not carry a commit frame");
    EveView v;
    v.codeword = BitString::from_bytes(std::span(bytes).subspan(layout.codeword_offset, layout.codeword_bytes),
                                       spec.codeword_bits());
    std::copy_n(bytes.begin() + static_cast<long>(layout.digest_offset), 32, v.digest.begin());
    const BitString truth = tap.sent_bits.slice(layout.codeword_offset * 8, spec.codeword_bits());
    v.ber = bit_error_rate(v.codeword, truth);
    return v;
}

std::optional<Salt> fast_open(const BitString& masked, const Fingerprint& f, const ReedSolomon& code)
{
    const auto& spec = code.spec();
    const auto msg = code.decode(bits_to_symbols(masked ^ f.bits, spec.k_bits()), DecodeMode::fast);
    if (!msg) return std::nullopt;
    return Salt{symbols_to_bits(*msg, spec.k_bits())};
}

} // namespace

AttackResult attack(std::span<const ChannelTap> taps, const AttackConfig& cfg, const ReedSolomon& code,
                    const QamSpec& qam, std::uint64_t seed)
{
    const auto& spec = code.spec();
    std::mt19937_64 rng(mix_seed(seed, 0xA77));
    HashDrbg guesses(seed, "attack-guess");
    AttackResult r;

    std::vector<const ChannelTap*> acked;
    for (const auto& t : taps)
        if (t.acked) acked.push_back(&t);
    std::sort(acked.begin(), acked.end(),
              [](const ChannelTap* x, const ChannelTap* y) { return x->level_index < y->level_index; });
    if (acked.empty()) return r;

    for (const auto* tap : acked) {
        const auto view = demodulate_commit(*tap, spec, qam, cfg.strategy, rng);
        r.level_ber.push_back(view.ber);
        bool got = false;
        switch (cfg.knowledge) {
        case Knowledge::none:
            for (std::uint64_t i = 0; i < cfg.budget && !got; ++i) {
                ++r.attempts_used;
                const Salt guess = random_salt(spec, guesses);
                got = guess == tap->sub_salt;
            }
            break;
        case Knowledge::distribution:
            require(static_cast<bool>(cfg.sampler), "attack: distribution knowledge needs a sampler");
            for (std::uint64_t i = 0; i < cfg.budget && !got; ++i) {
                ++r.attempts_used;
                const auto s = fast_open(view.codeword, cfg.sampler(mix_seed(seed, i)), code);
                got = s && *s == tap->sub_salt;
            }
            break;
        case Knowledge::perfect: {
            ++r.attempts_used;
            const auto s = fast_open(view.codeword, cfg.fingerprint, code);
            got = s && *s == tap->sub_salt;
            break;
        }
        }
        if (!got) break;
        ++r.levels_recovered;
    }
    double sum = 0;
    for (double b : r.level_ber) sum += b;
    r.observed_ber = sum / static_cast<double>(r.level_ber.size());
    std::uint32_t top = 0;
    for (const auto* t : acked) top = std::max(top, t->level_index + 1);
    r.salt_recovered = r.levels_recovered == acked.size() && acked.size() == top;
    return r;
}

InsiderTrial insider_trial(const ReedSolomon& code, const QamSpec& qam, const ChannelParams& channel, bool jamming,
                           EavesdropStrategy strategy, std::uint64_t seed, bool stop_at_first_failure)
{
    const auto& spec = code.spec();
    const auto ladder = ladder_levels(channel.p_max, channel.p0);
    const unsigned bps = qam.bits_per_symbol();
    HashDrbg drbg(seed, "insider");
    std::mt19937_64 rng(mix_seed(seed, 0x1D5));
    const Fingerprint f{drbg.bits(spec.codeword_bits())};

    InsiderTrial r;
    for (std::size_t level = 0; level < ladder.count(); ++level) {
        const Salt s = random_salt(spec, drbg);
        const BitString sent = commit(s, f, code).masked_codeword;
        const auto symbols = qam_modulate(sent, qam);
        const auto mask = random_jam_mask(symbols.size(), rng);
        const LinkBudget eve{channel.p2, channel.p0, jamming ? ladder.levels[level] : 0.0};
        const auto frame = dup_and_jam(symbols, mask, eve, bps, rng);
        const auto res = eavesdrop(frame, strategy, qam, sent, rng);
        const BitString seen = res.bits.slice(0, sent.size());
        r.level_ber.push_back(bit_error_rate(seen, sent));
        const auto a_sym = bits_to_symbols(seen, spec.k_bits());
        const auto b_sym = bits_to_symbols(sent, spec.k_bits());
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < a_sym.size(); ++i) wrong += a_sym[i] != b_sym[i];
        r.level_symbol_error.push_back(static_cast<double>(wrong) / static_cast<double>(a_sym.size()));
        const auto got = fast_open(seen, f, code);
        if (got && *got == s) {
            ++r.levels_recovered;
        } else if (stop_at_first_failure) {
            break;
        }
    }
    r.salt_recovered = r.levels_recovered == ladder.count();
    return r;
}

} // namespace sienna
