#pragma once

#include "sienna/fuzzy_commit.hpp"
#include "sienna/phy_jam.hpp"
#include "sienna/rng.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sienna {

using Key = Digest;

// Round-one stand-in for H(k) when no key has been agreed yet.
inline constexpr std::string_view bootstrap_parameter = "SIENNA-V1-BOOTSTRAP";
Digest bootstrap_key_hash();
Digest key_hash(const Key& k);

// hash256(0x02 || k || salt bytes). Without a previous key the bootstrap hash stands in for k.
Key kdf(const Key& k, const Salt& s);
Key kdf(const std::optional<Key>& k, const Salt& s);

// ---- messages ----

struct InitMessage {
    Digest key_hash{};
    std::uint64_t t_str_ms = 0;
    std::uint64_t t_end_ms = 0;
    friend bool operator==(const InitMessage&, const InitMessage&) = default;
};

// Throws SpecError unless t_end_ms > t_str_ms.
InitMessage make_init(const Digest& key_hash, std::uint64_t t_str_ms, std::uint64_t t_end_ms);

struct CommitMessage {
    std::uint32_t level_index = 0;
    Commitment commitment;
    friend bool operator==(const CommitMessage&, const CommitMessage&) = default;
};

enum class Verdict : std::uint8_t { nak = 0, ack = 1 };

struct AckNak {
    Verdict verdict = Verdict::nak;
    std::uint32_t level_index = 0;
    friend bool operator==(const AckNak&, const AckNak&) = default;
};

using Message = std::variant<InitMessage, CommitMessage, AckNak>;

// "SNNA" | version | type (01 init, 02 commit, 03 ack/nak) | fields, each a
// big-endian u32 length followed by that many bytes, in declaration order.
inline constexpr std::uint8_t message_wire_version = 1;
std::vector<std::uint8_t> encode_message(const Message& m, const RsCodeSpec& spec);
// Throws SpecError on any malformed frame.
Message decode_message(std::span<const std::uint8_t> bytes, const RsCodeSpec& spec);

// Byte offsets of the masked codeword and the salt digest inside an encoded commit.
struct CommitLayout {
    std::size_t codeword_offset = 0;
    std::size_t codeword_bytes = 0;
    std::size_t digest_offset = 0;
    std::size_t total_bytes = 0;
};
CommitLayout commit_layout(const RsCodeSpec& spec);

// ---- state machine ----

enum class Role { a, b };
enum class Phase { idle, announced, committing, await_ack, done, failed };
std::string_view phase_name(Phase p);

struct LevelRecord {
    std::uint32_t level_index = 0;
    unsigned attempts = 0;
    Salt sub_salt;          // a: the salt committed; b: the salt opened (once acked)
    Commitment commitment;  // latest one sent or received
    bool acked = false;
};

struct FailureInfo {
    std::uint32_t level_index = 0;
    std::string stage; // "key_hash", "open", "frame"
};

// One endpoint. Every operation either performs a legal transition or throws
// ProtocolError and leaves the session untouched.
//
//   a: idle -initiate-> announced -commit_level-> await_ack -ACK-> committing | done
//                                                           -NAK-> committing | failed
//   b: idle -on_init-> announced -on_commit-> committing | done | failed
class Session {
public:
    Session(Role role, std::optional<Key> key, std::shared_ptr<const ReedSolomon> code, std::size_t levels,
            unsigned retry_budget = 3);

    Role role() const { return role_; }
    Phase phase() const { return phase_; }
    std::size_t levels() const { return levels_; }
    unsigned retry_budget() const { return retry_budget_; }
    std::uint32_t current_level() const { return level_; }
    const std::optional<Key>& key() const { return key_; }
    const std::vector<LevelRecord>& pending() const { return pending_; }
    const std::optional<FailureInfo>& failure() const { return failure_; }
    std::uint64_t t_str_ms() const { return t_str_ms_; }
    std::uint64_t t_end_ms() const { return t_end_ms_; }
    const ReedSolomon& code() const { return *code_; }
    // XOR of the acked sub-salts; set once done.
    const std::optional<Salt>& evolution_salt() const { return salt_; }

    // device a
    InitMessage initiate(std::uint64_t t_str_ms, std::uint64_t t_end_ms);
    // A fresh sub-salt is drawn for every attempt, retries included.
    CommitMessage commit_level(const Fingerprint& f, HashDrbg& drbg);
    void on_verdict(const AckNak& v);

    // device b
    void on_init(const InitMessage& m);
    // Opens with every candidate; among those that recover the salt, the one
    // needing the fewest corrections (closest to a's fingerprint) wins.
    AckNak on_commit(const CommitMessage& m, std::span<const Fingerprint> candidates);
    // A commit frame that could not be parsed counts as a failed attempt.
    AckNak reject_commit(std::uint32_t level_index);

private:
    void expect(Role r, std::initializer_list<Phase> allowed, const char* op) const;
    AckNak record_attempt(std::uint32_t level, std::optional<Salt> opened, const Commitment* c,
                          const char* stage);
    void finish();

    Role role_;
    std::optional<Key> key_;
    std::shared_ptr<const ReedSolomon> code_;
    std::size_t levels_;
    unsigned retry_budget_;
    Phase phase_ = Phase::idle;
    std::uint32_t level_ = 0;
    std::uint64_t t_str_ms_ = 0;
    std::uint64_t t_end_ms_ = 0;
    std::vector<LevelRecord> pending_;
    std::optional<FailureInfo> failure_;
    std::optional<Salt> salt_;
};

// ---- end-to-end run over the jammed channel ----

struct PairingConfig {
    RsCodeSpec rs = make_rs_spec(10, 1023, 63);
    QamSpec qam{4};
    ChannelParams channel{};
    bool jamming = true;        // b jams at ladder level i while level i is sent
    unsigned retry_budget = 3;
    std::uint64_t t_str_ms = 0;
    std::uint64_t t_end_ms = 60000;
    double symbol_rate = 250e3; // airtime on the simulated clock
};

struct DeviceA {
    std::optional<Key> key;
    Fingerprint fingerprint;
};

struct DeviceB {
    std::optional<Key> key;
    std::vector<Fingerprint> candidates;
};

struct TranscriptEntry {
    double time_s = 0;
    std::string direction; // "a->b" or "b->a"
    Message message;
    std::size_t wire_bytes = 0;
    double jam_power = 0;
};

// What a passive listener at distance p2 picked up for one commit transmission.
struct ChannelTap {
    std::uint32_t level_index = 0;
    unsigned attempt = 0;
    bool acked = false;
    double jam_power = 0;
    DialogFrame frame;     // eavesdropper's view of the duplicated stream
    BitString sent_bits;   // ground truth, for BER reporting only
    Salt sub_salt;         // ground truth, for judging attacks only
};

struct PairingOutcome {
    bool success = false;
    std::optional<Key> key_a;
    std::optional<Key> key_b;
    std::optional<Salt> salt;
    std::optional<FailureInfo> failure;
    std::vector<TranscriptEntry> transcript;
    std::vector<ChannelTap> taps; // filled when requested
    std::size_t commit_attempts = 0;
    std::size_t legit_bit_errors = 0; // residual errors in b's stitched commit streams
};

PairingOutcome run_pairing(const DeviceA& a, const DeviceB& b, const PairingConfig& cfg, std::uint64_t seed,
                           bool record_taps = false);

// One JSON object per message: t, dir, type and the message fields.
void write_transcript_jsonl(std::ostream& os, const std::vector<TranscriptEntry>& transcript);

// ---- adversaries ----

enum class Knowledge { none, distribution, perfect };

struct AttackConfig {
    Knowledge knowledge = Knowledge::perfect;
    std::uint64_t budget = 1; // salt guesses (none) or fingerprint samples (distribution) per level
    Fingerprint fingerprint;  // perfect knowledge
    std::function<Fingerprint(std::uint64_t)> sampler; // distribution knowledge
    EavesdropStrategy strategy = EavesdropStrategy::random_pick;
};

struct AttackResult {
    bool salt_recovered = false;
    double observed_ber = 0;           // mean over the levels attacked
    std::uint64_t attempts_used = 0;
    std::size_t levels_recovered = 0;
    std::vector<double> level_ber;     // codeword BER per level attacked
};

// Attacks the acked transmission of each level in order and stops at the
// first level it cannot open. Success is judged against the true sub-salts.
AttackResult attack(std::span<const ChannelTap> taps, const AttackConfig& cfg, const ReedSolomon& code,
                    const QamSpec& qam, std::uint64_t seed);

// Perfect-knowledge insider against a lone sender, without running device b:
// every ladder level carries a fresh sub-salt committed against a random f the
// insider knows exactly. Decoding uses DecodeMode::fast.
struct InsiderTrial {
    bool salt_recovered = false;
    std::size_t levels_recovered = 0;
    std::vector<double> level_ber;
    std::vector<double> level_symbol_error; // fraction of codeword symbols in error
};
InsiderTrial insider_trial(const ReedSolomon& code, const QamSpec& qam, const ChannelParams& channel, bool jamming,
                           EavesdropStrategy strategy, std::uint64_t seed, bool stop_at_first_failure = true);

} // namespace sienna
