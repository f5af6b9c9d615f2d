#include "doctest.h"

#include "sienna/errors.hpp"
#include "sienna/pairing.hpp"
#include "sienna/pipeline.hpp"

#include <array>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

using namespace sienna;

namespace {

Key key_from_hex(const std::string& hex)
{
    Key k{};
    for (std::size_t i = 0; i < 32; ++i) k[i] = static_cast<std::uint8_t>(std::stoi(hex.substr(2 * i, 2), nullptr, 16));
    return k;
}

Key counting_key()
{
    Key k{};
    for (std::size_t i = 0; i < 32; ++i) k[i] = static_cast<std::uint8_t>(i);
    return k;
}

std::shared_ptr<const ReedSolomon> small_code()
{
    return std::make_shared<const ReedSolomon>(make_rs_spec(3, 7, 3));
}

// p_max = 9 p0 gives a one-level ladder.
ChannelParams quiet_channel(double p_max = 9.0)
{
    ChannelParams ch;
    ch.p0 = 1.0;
    ch.p1 = 1e4;
    ch.p2 = 1e4;
    ch.p_max = p_max;
    return ch;
}

} // namespace

TEST_CASE("bootstrap parameter and key hashes")
{
    CHECK(to_hex(bootstrap_key_hash()) == "1218e407a441473f3a0022af2f7a029485b8fb623a7c0d9a937af019f7dc3f06");
    CHECK(to_hex(key_hash(counting_key())) == "630dcd2966c4336691125448bbb25b4ff412a49c732db2c8abc1b8581bd710dd");
}

TEST_CASE("kdf")
{
    const Salt s{BitString::from_string("1011")};
    CHECK(to_hex(kdf(counting_key(), s)) == "4019600f94edcbf26cc5fbce91284e4e5f14b92ec3734ece16cc8b4367cb4665");
    // without a previous key the bootstrap hash takes its place
    CHECK(to_hex(kdf(std::optional<Key>{}, s)) == "bb37c684c5783c945188181aa44de2f80fc9bbbedba68da1242778a2c122656f");
    CHECK(kdf(counting_key(), s) == kdf(counting_key(), s));

    HashDrbg drbg(3, "kdf-test");
    const Salt s1{drbg.bits(630)};
    Salt s2 = s1;
    s2.bits.flip(17);
    CHECK(kdf(counting_key(), s1) != kdf(counting_key(), s2));
    CHECK(kdf(kdf(counting_key(), s1), s2) != kdf(kdf(counting_key(), s2), s1));
}

TEST_CASE("init message")
{
    CHECK_THROWS_AS(make_init(bootstrap_key_hash(), 5000, 5000), SpecError);
    CHECK_THROWS_AS(make_init(bootstrap_key_hash(), 6000, 5000), SpecError);

    Session first(Role::a, std::nullopt, small_code(), 1);
    CHECK(first.initiate(0, 60000).key_hash == bootstrap_key_hash());
    Session second(Role::a, counting_key(), small_code(), 1);
    const auto m = second.initiate(1000, 61000);
    CHECK(m.key_hash == key_hash(counting_key()));
    CHECK(m.t_end_ms - m.t_str_ms == 60000);
    CHECK(second.phase() == Phase::announced);

    Session bad(Role::a, std::nullopt, small_code(), 1);
    CHECK_THROWS_AS(bad.initiate(10, 10), SpecError);
    CHECK(bad.phase() == Phase::idle);
}

TEST_CASE("wire format")
{
    const auto spec = make_rs_spec(3, 7, 3);
    const AckNak ack{Verdict::ack, 2};
    const std::vector<std::uint8_t> expected{'S', 'N', 'N', 'A', 1, 3, 0, 0, 0, 1, 1, 0, 0, 0, 4, 0, 0, 0, 2};
    CHECK(encode_message(ack, spec) == expected);
    CHECK(std::get<AckNak>(decode_message(expected, spec)) == ack);

    const auto init = make_init(bootstrap_key_hash(), 0x0102, 0xEA60);
    const auto ib = encode_message(init, spec);
    REQUIRE(ib.size() == 6 + 36 + 12 + 12);
    CHECK(ib[5] == 1);
    CHECK(ib[6 + 36 + 4 + 6] == 0x01);
    CHECK(ib[6 + 36 + 4 + 7] == 0x02);
    CHECK(std::get<InitMessage>(decode_message(ib, spec)) == init);

    HashDrbg drbg(1, "wire");
    const ReedSolomon code(spec);
    const CommitMessage cm{0, commit(random_salt(spec, drbg), Fingerprint{drbg.bits(21)}, code)};
    const auto cb = encode_message(cm, spec);
    CHECK(cb[5] == 2);
    CHECK(std::get<CommitMessage>(decode_message(cb, spec)) == cm);
    const auto layout = commit_layout(spec);
    CHECK(cb.size() == layout.total_bytes);
    CHECK(BitString::from_bytes(std::span(cb).subspan(layout.codeword_offset, layout.codeword_bytes), 21) ==
          cm.commitment.masked_codeword);
    CHECK(std::equal(cm.commitment.salt_hash.begin(), cm.commitment.salt_hash.end(),
                     cb.begin() + static_cast<long>(layout.digest_offset)));
    CHECK(commit_layout(default_pairing_code()).total_bytes == 29 + 1279 + 32);

    auto truncated = cb;
    truncated.pop_back();
    CHECK_THROWS_AS(decode_message(truncated, spec), SpecError);
    auto trailing = expected;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_message(trailing, spec), SpecError);
    auto magic = expected;
    magic[0] = 'X';
    CHECK_THROWS_AS(decode_message(magic, spec), SpecError);
    auto type = expected;
    type[5] = 9;
    CHECK_THROWS_AS(decode_message(type, spec), SpecError);
    auto verdict = expected;
    verdict[10] = 7;
    CHECK_THROWS_AS(decode_message(verdict, spec), SpecError);
    CHECK_THROWS_AS(decode_message(cb, make_rs_spec(4, 15, 5)), SpecError);
}

TEST_CASE("session walk-through with identical fingerprints")
{
    auto code = small_code();
    Session a(Role::a, std::nullopt, code, 2);
    Session b(Role::b, std::nullopt, code, 2);
    HashDrbg drbg(4, "walk");
    const Fingerprint f{drbg.bits(21)};
    const std::vector<Fingerprint> cands{f};

    b.on_init(a.initiate(0, 60000));
    CHECK(b.phase() == Phase::announced);
    for (std::uint32_t level = 0; level < 2; ++level) {
        const auto c = a.commit_level(f, drbg);
        CHECK(c.level_index == level);
        CHECK(a.phase() == Phase::await_ack);
        const auto v = b.on_commit(c, cands);
        CHECK(v.verdict == Verdict::ack);
        a.on_verdict(v);
    }
    REQUIRE(a.phase() == Phase::done);
    REQUIRE(b.phase() == Phase::done);
    CHECK(a.key() == b.key());
    CHECK(a.evolution_salt()->bits == (a.pending()[0].sub_salt.bits ^ a.pending()[1].sub_salt.bits));
    CHECK(*a.key() == kdf(std::optional<Key>{}, *a.evolution_salt()));
}

TEST_CASE("b rejects a wrong key hash")
{
    Session b(Role::b, counting_key(), small_code(), 1);
    b.on_init(make_init(bootstrap_key_hash(), 0, 1));
    CHECK(b.phase() == Phase::failed);
    REQUIRE(b.failure());
    CHECK(b.failure()->stage == "key_hash");
}

TEST_CASE("retry budget: fresh sub-salt per attempt, then failure")
{
    auto code = small_code();
    Session a(Role::a, std::nullopt, code, 1, 3);
    Session b(Role::b, std::nullopt, code, 1, 3);
    HashDrbg drbg(5, "retry");
    const Fingerprint fa{drbg.bits(21)};
    const std::vector<Fingerprint> wrong{Fingerprint{fa.bits ^ BitString::from_string("111111111111111111111")}};
    b.on_init(a.initiate(0, 1));
    std::vector<Salt> salts;
    for (int attempt = 0; attempt < 4; ++attempt) {
        const auto c = a.commit_level(fa, drbg);
        salts.push_back(a.pending()[0].sub_salt);
        const auto v = b.on_commit(c, wrong);
        CHECK(v.verdict == Verdict::nak);
        a.on_verdict(v);
    }
    CHECK(a.phase() == Phase::failed);
    CHECK(b.phase() == Phase::failed);
    CHECK(a.failure()->level_index == 0);
    CHECK(a.failure()->stage == "open");
    CHECK(a.pending()[0].attempts == 4);
    CHECK(salts[0] != salts[1]);
    CHECK(salts[1] != salts[2]);
    CHECK(!a.key().has_value());
}

TEST_CASE("b picks the candidate that needs the fewest corrections")
{
    auto code = small_code();
    Session a(Role::a, std::nullopt, code, 1);
    Session b(Role::b, std::nullopt, code, 1);
    HashDrbg drbg(6, "pick");
    const Fingerprint f{drbg.bits(21)};
    Fingerprint one_off = f;
    one_off.bits.flip(4);
    const std::vector<Fingerprint> cands{Fingerprint{drbg.bits(21)}, one_off, f};
    b.on_init(a.initiate(0, 1));
    const auto c = a.commit_level(f, drbg);
    CHECK(b.on_commit(c, cands).verdict == Verdict::ack);
    CHECK(b.pending()[0].sub_salt == a.pending()[0].sub_salt);
    CHECK_THROWS_AS(b.on_commit(c, cands), ProtocolError); // already done
}

TEST_CASE("role and phase violations throw and leave the session unchanged")
{
    auto code = small_code();
    HashDrbg drbg(7, "roles");
    const Fingerprint f{drbg.bits(21)};
    Session a(Role::a, std::nullopt, code, 1);
    CHECK_THROWS_AS(a.commit_level(f, drbg), ProtocolError);
    CHECK_THROWS_AS(a.on_verdict(AckNak{Verdict::ack, 0}), ProtocolError);
    CHECK_THROWS_AS(a.on_init(make_init(bootstrap_key_hash(), 0, 1)), ProtocolError);
    CHECK(a.phase() == Phase::idle);
    a.initiate(0, 1);
    CHECK_THROWS_AS(a.initiate(0, 1), ProtocolError);
    a.commit_level(f, drbg);
    CHECK_THROWS_AS(a.on_verdict(AckNak{Verdict::ack, 1}), ProtocolError);
    CHECK(a.phase() == Phase::await_ack);

    Session b(Role::b, std::nullopt, code, 1);
    CHECK_THROWS_AS(b.initiate(0, 1), ProtocolError);
    CHECK_THROWS_AS(b.reject_commit(0), ProtocolError);
    CHECK(b.phase() == Phase::idle);
}

namespace {

struct Snapshot {
    Phase phase;
    std::uint32_t level;
    std::size_t records;
    unsigned attempts;
    std::optional<Key> key;
    bool operator==(const Snapshot&) const = default;
};

Snapshot snap(const Session& s)
{
    unsigned attempts = 0;
    for (const auto& r : s.pending()) attempts += r.attempts;
    return Snapshot{s.phase(), s.current_level(), s.pending().size(), attempts, s.key()};
}

int rank(Phase p)
{
    switch (p) {
    case Phase::idle: return 0;
    case Phase::announced: return 1;
    case Phase::committing:
    case Phase::await_ack: return 2;
    case Phase::done:
    case Phase::failed: return 3;
    }
    return -1;
}

// Every transition either throws with no state change or moves forward in the
// protocol order; the key changes only on entering done; terminal phases absorb.
void check_step(const Snapshot& before, const Snapshot& after, bool threw)
{
    if (threw) {
        CHECK(after == before);
        return;
    }
    CHECK(rank(after.phase) >= rank(before.phase));
    CHECK(rank(before.phase) < 3);
    CHECK(after.level >= before.level);
    CHECK(after.level <= before.level + 1);
    if (after.key != before.key) CHECK(after.phase == Phase::done);
    if (after.phase == Phase::done) CHECK(after.key.has_value());
}

template <class Event>
void enumerate(std::size_t depth, std::size_t alphabet, const std::function<Session()>& fresh, const Event& apply,
               std::size_t& sequences)
{
    std::vector<std::size_t> seq(depth, 0);
    for (;;) {
        Session s = fresh();
        for (auto e : seq) {
            const auto before = snap(s);
            bool threw = false;
            try {
                apply(s, e);
            } catch (const ProtocolError&) {
                threw = true;
            }
            check_step(before, snap(s), threw);
        }
        ++sequences;
        std::size_t i = 0;
        while (i < depth && ++seq[i] == alphabet) seq[i++] = 0;
        if (i == depth) break;
    }
}

} // namespace

TEST_CASE("exhaustive event permutations at L = 2 keep the phase order")
{
    auto code = small_code();
    HashDrbg drbg(8, "perm");
    const Fingerprint f{drbg.bits(21)};
    const Fingerprint far{f.bits ^ BitString::from_string("111111111111111111111")};

    std::size_t sequences = 0;
    // device a: initiate, commit, ack/nak for levels 0 and 1
    enumerate(
        6, 6, [&] { return Session(Role::a, std::nullopt, code, 2, 1); },
        [&](Session& s, std::size_t e) {
            switch (e) {
            case 0: s.initiate(0, 60000); break;
            case 1: s.commit_level(f, drbg); break;
            default: s.on_verdict(AckNak{(e % 2) ? Verdict::nak : Verdict::ack, static_cast<std::uint32_t>((e - 2) / 2)});
            }
        },
        sequences);
    CHECK(sequences == 46656);

    // device b: init (good/bad hash), commits for levels 0 and 1 (openable or not), garbled frames
    Session sender(Role::a, std::nullopt, code, 2, 1);
    sender.initiate(0, 60000);
    std::array<CommitMessage, 2> good;
    for (std::uint32_t l = 0; l < 2; ++l) {
        good[l] = sender.commit_level(f, drbg);
        sender.on_verdict(AckNak{Verdict::ack, l});
    }
    const std::vector<Fingerprint> cands{f};
    sequences = 0;
    enumerate(
        5, 8, [&] { return Session(Role::b, std::nullopt, code, 2, 1); },
        [&](Session& s, std::size_t e) {
            switch (e) {
            case 0: s.on_init(make_init(bootstrap_key_hash(), 0, 60000)); break;
            case 1: s.on_init(make_init(key_hash(counting_key()), 0, 60000)); break;
            case 2:
            case 3: s.on_commit(good[e - 2], cands); break;
            case 4:
            case 5: s.on_commit(good[e - 4], std::vector<Fingerprint>{far}); break;
            default: s.reject_commit(static_cast<std::uint32_t>(e - 6));
            }
        },
        sequences);
    CHECK(sequences == 32768);
}

TEST_CASE("soundness surrogate: fingerprints more than t symbols apart never pair")
{
    // (2^3, 7, 3), t = 2: every 3-symbol corruption pattern of b's fingerprint
    auto code = small_code();
    HashDrbg drbg(9, "sound");
    const Fingerprint fa{drbg.bits(21)};
    std::size_t trials = 0, successes = 0;
    for (unsigned p0 = 0; p0 < 7; ++p0)
        for (unsigned p1 = p0 + 1; p1 < 7; ++p1)
            for (unsigned p2 = p1 + 1; p2 < 7; ++p2)
                for (unsigned e = 0; e < 343; ++e) {
                    Fingerprint fb = fa;
                    const unsigned pos[3] = {p0, p1, p2};
                    const unsigned val[3] = {1 + e % 7, 1 + (e / 7) % 7, 1 + e / 49};
                    for (int k = 0; k < 3; ++k)
                        for (unsigned j = 0; j < 3; ++j)
                            if ((val[k] >> (2 - j)) & 1) fb.bits.flip(pos[k] * 3 + j);
                    Session a(Role::a, std::nullopt, code, 1, 0);
                    Session b(Role::b, std::nullopt, code, 1, 0);
                    b.on_init(a.initiate(0, 1));
                    a.on_verdict(b.on_commit(a.commit_level(fa, drbg), std::vector<Fingerprint>{fb}));
                    ++trials;
                    successes += a.phase() == Phase::done || b.phase() == Phase::done;
                }
    CHECK(trials == 35 * 343);
    CHECK(successes == 0);
}

TEST_CASE("run_pairing: noiseless single level succeeds")
{
    PairingConfig cfg;
    cfg.rs = make_rs_spec(8, 255, 201);
    cfg.channel = quiet_channel();
    HashDrbg drbg(10, "noiseless");
    const Fingerprint f{drbg.bits(cfg.rs.codeword_bits())};
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto out = run_pairing(DeviceA{std::nullopt, f}, DeviceB{std::nullopt, {f}}, cfg, seed);
        REQUIRE(out.success);
        CHECK(out.key_a == out.key_b);
        CHECK(out.commit_attempts == 1);
        CHECK(out.legit_bit_errors == 0);
        CHECK(out.transcript.size() == 3);
    }
}

TEST_CASE("run_pairing: ladder levels, transcript and taps")
{
    PairingConfig cfg;
    cfg.rs = make_rs_spec(8, 255, 201);
    cfg.channel = quiet_channel(1000);
    HashDrbg drbg(11, "ladder");
    const Fingerprint f{drbg.bits(cfg.rs.codeword_bits())};
    const auto out = run_pairing(DeviceA{counting_key(), f}, DeviceB{counting_key(), {f}}, cfg, 3, true);
    REQUIRE(out.success);
    CHECK(out.key_a != counting_key());
    CHECK(*out.key_a == kdf(counting_key(), *out.salt));
    REQUIRE(out.taps.size() == 4);
    const auto ladder = ladder_levels(1000, 1);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(out.taps[i].level_index == i);
        CHECK(out.taps[i].acked);
        CHECK(out.taps[i].jam_power == doctest::Approx(ladder.levels[i]));
    }
    BitString x = out.taps[0].sub_salt.bits;
    for (std::size_t i = 1; i < 4; ++i) x ^= out.taps[i].sub_salt.bits;
    CHECK(x == out.salt->bits);

    std::ostringstream os;
    write_transcript_jsonl(os, out.transcript);
    std::istringstream is(os.str());
    std::string line;
    std::vector<nlohmann::json> rows;
    while (std::getline(is, line)) rows.push_back(nlohmann::json::parse(line));
    REQUIRE(rows.size() == 9);
    CHECK(rows[0]["type"] == "init");
    CHECK(rows[0]["key_hash"] == to_hex(key_hash(counting_key())));
    CHECK(rows[1]["type"] == "commit");
    CHECK(rows[1]["dir"] == "a->b");
    CHECK(rows[2]["type"] == "ack");
    CHECK(rows[2]["dir"] == "b->a");
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i]["t"].get<double>() > rows[i - 1]["t"].get<double>());
}

TEST_CASE("run_pairing: the jamming mask is redrawn for every retry")
{
    PairingConfig cfg;
    cfg.rs = make_rs_spec(8, 255, 201);
    cfg.channel = quiet_channel();
    HashDrbg drbg(12, "remask");
    const Fingerprint fa{drbg.bits(cfg.rs.codeword_bits())};
    const Fingerprint fb{drbg.bits(cfg.rs.codeword_bits())};
    const auto out = run_pairing(DeviceA{std::nullopt, fa}, DeviceB{std::nullopt, {fb}}, cfg, 1, true);
    CHECK(!out.success);
    REQUIRE(out.failure);
    CHECK(out.failure->level_index == 0);
    CHECK(out.commit_attempts == 4);
    REQUIRE(out.taps.size() == 4);
    CHECK(out.taps[0].frame.jam_mask != out.taps[1].frame.jam_mask);
    CHECK(out.taps[2].frame.jam_mask != out.taps[3].frame.jam_mask);
    CHECK(out.taps[0].sub_salt != out.taps[1].sub_salt);
}

TEST_CASE("run_pairing: mismatched round keys fail at the key hash")
{
    PairingConfig cfg;
    cfg.rs = make_rs_spec(8, 255, 201);
    cfg.channel = quiet_channel();
    HashDrbg drbg(13, "keys");
    const Fingerprint f{drbg.bits(cfg.rs.codeword_bits())};
    const auto out = run_pairing(DeviceA{std::nullopt, f}, DeviceB{counting_key(), {f}}, cfg, 1);
    CHECK(!out.success);
    CHECK(out.failure->stage == "key_hash");
    CHECK(out.commit_attempts == 0);
}

TEST_CASE("run_pairing on synthetic scenes")
{
    const ScenarioConfig sc;
    const PipelineConfig pc;
    const PairingConfig cfg;
    const auto spec = cfg.rs;

    SUBCASE("same subject, default noise")
    {
        int ok = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto scene = make_pairing_scene(sc, 2000 + seed);
            const auto fa = belt_fingerprint(scene.belt, scene.t_str, scene.t_end, pc, spec);
            const auto pr = prms_fingerprints(scene.radar, 2, scene.t_str, scene.t_end, pc, spec);
            const auto out = run_pairing(DeviceA{std::nullopt, fa}, DeviceB{std::nullopt, pr.fingerprints}, cfg, seed);
            if (out.success) {
                ++ok;
                CHECK(out.key_a == out.key_b);
            }
        }
        CHECK(ok >= 18);
    }

    SUBCASE("belt on the other subject: NAK at level 0, then failure")
    {
        const auto scene = make_pairing_scene(sc, 77);
        const auto pr = prms_fingerprints(scene.radar, 2, scene.t_str, scene.t_end, pc, spec);
        const auto fa = belt_fingerprint(scene.belt, scene.t_str, scene.t_end, pc, spec);
        // keep only the radar source that does not belong to the belt wearer
        const std::size_t other =
            hamming_similarity(fa.bits, pr.fingerprints[0].bits) < hamming_similarity(fa.bits, pr.fingerprints[1].bits)
                ? 0
                : 1;
        const auto out =
            run_pairing(DeviceA{std::nullopt, fa}, DeviceB{std::nullopt, {pr.fingerprints[other]}}, cfg, 1);
        CHECK(!out.success);
        REQUIRE(out.failure);
        CHECK(out.failure->level_index == 0);
        CHECK(out.failure->stage == "open");
        REQUIRE(out.transcript.size() >= 3);
        CHECK(std::get<AckNak>(out.transcript[2].message).verdict == Verdict::nak);
    }
}

TEST_CASE("attacks")
{
    SUBCASE("no knowledge, 128-bit sub-salts, budget 10^6")
    {
        PairingConfig cfg;
        cfg.rs = make_rs_spec(8, 255, 16);
        cfg.channel = quiet_channel();
        HashDrbg drbg(14, "none");
        const Fingerprint f{drbg.bits(cfg.rs.codeword_bits())};
        const auto out = run_pairing(DeviceA{std::nullopt, f}, DeviceB{std::nullopt, {f}}, cfg, 2, true);
        REQUIRE(out.success);
        AttackConfig ac;
        ac.knowledge = Knowledge::none;
        ac.budget = 1'000'000;
        const auto r = attack(out.taps, ac, ReedSolomon(cfg.rs), cfg.qam, 5);
        CHECK(!r.salt_recovered);
        CHECK(r.attempts_used == 1'000'000);
    }

    PairingConfig cfg;
    cfg.rs = make_rs_spec(8, 255, 201);
    HashDrbg drbg(15, "insider");
    const Fingerprint f{drbg.bits(cfg.rs.codeword_bits())};
    const ReedSolomon code(cfg.rs);

    SUBCASE("perfect knowledge without jamming opens every level")
    {
        cfg.jamming = false;
        const auto out = run_pairing(DeviceA{std::nullopt, f}, DeviceB{std::nullopt, {f}}, cfg, 4, true);
        REQUIRE(out.success);
        AttackConfig ac;
        ac.fingerprint = f;
        const auto r = attack(out.taps, ac, code, cfg.qam, 6);
        CHECK(r.salt_recovered);
        CHECK(r.levels_recovered == 4);
        CHECK(r.observed_ber < 0.01);
    }

    SUBCASE("perfect knowledge against the ladder fails")
    {
        const auto out = run_pairing(DeviceA{std::nullopt, f}, DeviceB{std::nullopt, {f}}, cfg, 4, true);
        REQUIRE(out.success);
        AttackConfig ac;
        ac.fingerprint = f;
        const auto r = attack(out.taps, ac, code, cfg.qam, 6);
        CHECK(!r.salt_recovered);
        CHECK(r.observed_ber > 0.1);
    }

    SUBCASE("distribution knowledge with a small budget fails")
    {
        const auto out = run_pairing(DeviceA{std::nullopt, f}, DeviceB{std::nullopt, {f}}, cfg, 4, true);
        AttackConfig ac;
        ac.knowledge = Knowledge::distribution;
        ac.budget = 8;
        ac.sampler = [&](std::uint64_t s) {
            HashDrbg d(s, "model");
            return Fingerprint{d.bits(cfg.rs.codeword_bits())};
        };
        const auto r = attack(out.taps, ac, code, cfg.qam, 7);
        CHECK(!r.salt_recovered);
        CHECK(r.attempts_used == 8);
    }
}

TEST_CASE("insider trial against the full code")
{
    const ReedSolomon code(default_pairing_code());
    const QamSpec qam{4};
    const double frac = static_cast<double>(correctable_symbols(code.spec())) / code.spec().m_symbols;
    for (double p2 : {1.0, 10.0, 100.0, 1000.0}) {
        CAPTURE(p2);
        ChannelParams ch;
        ch.p2 = p2;
        const auto r = insider_trial(code, qam, ch, true, EavesdropStrategy::random_pick, 1, false);
        CHECK(!r.salt_recovered);
        const auto ladder = ladder_levels(ch.p_max, ch.p0);
        for (std::size_t i = 0; i < ladder.count(); ++i) {
            const double ratio = ladder.levels[i] / p2;
            if (ratio > 1 && ratio <= 9) CHECK(r.level_symbol_error[i] > frac);
        }
    }
    ChannelParams ch;
    ch.p2 = ch.p1;
    CHECK(insider_trial(code, qam, ch, false, EavesdropStrategy::random_pick, 2).salt_recovered);
}
