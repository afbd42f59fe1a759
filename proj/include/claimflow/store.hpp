#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "claimflow/claims.hpp"
#include "claimflow/context.hpp"
#include "claimflow/engine.hpp"

namespace claimflow::store {

/// "C-000001" for 1.
std::string format_claim_id(std::uint64_t n);

/// Durable per-user contexts plus the append-only claim log.
/// Storage faults surface as StorageUnavailable; violated record invariants
/// (duplicate states, an unvalidated IMEI) are defects (std::logic_error).
class Store : public engine::ClaimSink {
public:
    /// The saved context, or a fresh one (formal, given language, empty frame).
    UserContext load_context(const std::string& user_id, Language language);
    void save_context(const UserContext& context);
    /// Assigns the next claim id, appends the record and returns the id.
    std::string persist_claim(const claims::ClaimRecord& record) override;

    virtual std::optional<UserContext> find_context(const std::string& user_id) = 0;
    virtual std::vector<claims::ClaimRecord> claims() = 0;

protected:
    virtual void write_context(const UserContext& context) = 0;
    virtual void append_claim(const claims::ClaimRecord& record) = 0;
    /// Called with the store's claim mutex held.
    virtual std::uint64_t next_claim_number() = 0;

    std::mutex claim_mutex_;
};

/// Process-local store for tests. Documents are kept serialized so every save
/// and load exercises the same encoding as the file store.
class MemoryStore : public Store {
public:
    std::optional<UserContext> find_context(const std::string& user_id) override;
    std::vector<claims::ClaimRecord> claims() override;

    /// Fault injection: while set, every operation throws StorageUnavailable.
    void set_unavailable(bool unavailable) { unavailable_ = unavailable; }

protected:
    void write_context(const UserContext& context) override;
    void append_claim(const claims::ClaimRecord& record) override;
    std::uint64_t next_claim_number() override;

private:
    void check_available() const;

    std::atomic<bool> unavailable_{false};
    std::mutex mutex_;
    std::map<std::string, std::string> contexts_;
    std::vector<std::string> claim_log_;
};

/// File-backed store:
///   <root>/contexts/<escaped user id>.json  one document per user, replaced atomically
///   <root>/claims/log.jsonl                 append-only claim log, one record per line
class FileStore : public Store {
public:
    /// Creates the directory layout when missing. Throws StorageUnavailable
    /// when the root is unusable or the claim log is corrupted.
    explicit FileStore(std::filesystem::path root);

    std::optional<UserContext> find_context(const std::string& user_id) override;
    std::vector<claims::ClaimRecord> claims() override;

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path context_path(const std::string& user_id) const;

protected:
    void write_context(const UserContext& context) override;
    void append_claim(const claims::ClaimRecord& record) override;
    std::uint64_t next_claim_number() override;

private:
    std::filesystem::path root_;
    std::uint64_t claim_count_ = 0;
};

/// Percent-encodes everything except [A-Za-z0-9_-] so any user id maps to a
/// safe, unique file name.
std::string escape_user_id(const std::string& user_id);

} // namespace claimflow::store
