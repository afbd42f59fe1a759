#include "claimflow/store.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace claimflow::store {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_claim_id(std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "C-%06llu", static_cast<unsigned long long>(n));
    return buf;
}

UserContext Store::load_context(const std::string& user_id, Language language) {
    if (auto ctx = find_context(user_id)) return std::move(*ctx);
    return fresh_context(user_id, language);
}

void Store::save_context(const UserContext& context) {
    check_invariants(context);
    write_context(context);
}

std::string Store::persist_claim(const claims::ClaimRecord& record) {
    claims::check_record_slots(record);
    std::lock_guard lock(claim_mutex_);
    auto stored = record;
    stored.claim_id = format_claim_id(next_claim_number());
    append_claim(stored);
    return stored.claim_id;
}

// --- memory ----------------------------------------------------------------

void MemoryStore::check_available() const {
    if (unavailable_) throw StorageUnavailable("store is unavailable (injected fault)");
}

std::optional<UserContext> MemoryStore::find_context(const std::string& user_id) {
    check_available();
    std::lock_guard lock(mutex_);
    auto it = contexts_.find(user_id);
    if (it == contexts_.end()) return std::nullopt;
    return context_from_json(json::parse(it->second));
}

void MemoryStore::write_context(const UserContext& context) {
    check_available();
    auto doc = to_json(context).dump();
    std::lock_guard lock(mutex_);
    contexts_[context.user_id] = std::move(doc);
}

std::uint64_t MemoryStore::next_claim_number() {
    check_available();
    std::lock_guard lock(mutex_);
    return claim_log_.size() + 1;
}

void MemoryStore::append_claim(const claims::ClaimRecord& record) {
    check_available();
    std::lock_guard lock(mutex_);
    claim_log_.push_back(claims::to_json(record).dump());
}

std::vector<claims::ClaimRecord> MemoryStore::claims() {
    check_available();
    std::lock_guard lock(mutex_);
    std::vector<claims::ClaimRecord> out;
    for (const auto& line : claim_log_) out.push_back(claims::claim_from_json(json::parse(line)));
    return out;
}

// --- files -----------------------------------------------------------------

std::string escape_user_id(const std::string& user_id) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : user_id) {
        const bool plain = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                           c == '_' || c == '-';
        if (plain) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        }
    }
    return out;
}

namespace {

[[noreturn]] void io_failure(const std::string& what, const fs::path& path) {
    throw StorageUnavailable(what + " '" + path.string() + "': " + std::strerror(errno));
}

void write_all(int fd, const std::string& data, const fs::path& path) {
    std::size_t done = 0;
    while (done < data.size()) {
        const auto n = ::write(fd, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            io_failure("cannot write", path);
        }
        done += static_cast<std::size_t>(n);
    }
}

void sync_directory(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

// Writes to a sibling temp file, syncs it and renames it over the target.
void replace_file(const fs::path& target, const std::string& data) {
    const fs::path tmp = target.string() + ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) io_failure("cannot create", tmp);
    try {
        write_all(fd, data, tmp);
        if (::fsync(fd) != 0) io_failure("cannot sync", tmp);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    if (::rename(tmp.c_str(), target.c_str()) != 0) io_failure("cannot replace", target);
    sync_directory(target.parent_path());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_failure("cannot read", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::vector<std::string> lines;
    if (!fs::exists(path)) return lines;
    std::ifstream in(path, std::ios::binary);
    if (!in) io_failure("cannot read", path);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

claims::ClaimRecord parse_claim_line(const std::string& line, const fs::path& path, std::size_t n) {
    try {
        return claims::claim_from_json(json::parse(line));
    } catch (const std::exception& e) {
        throw StorageUnavailable("corrupted claim record " + std::to_string(n) + " in '" + path.string() +
                                 "': " + e.what());
    }
}

} // namespace

FileStore::FileStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_ / "contexts", ec);
    if (ec) throw StorageUnavailable("cannot create '" + (root_ / "contexts").string() + "': " + ec.message());
    fs::create_directories(root_ / "claims", ec);
    if (ec) throw StorageUnavailable("cannot create '" + (root_ / "claims").string() + "': " + ec.message());
    const auto log = root_ / "claims" / "log.jsonl";
    const auto lines = read_lines(log);
    for (std::size_t i = 0; i < lines.size(); ++i) parse_claim_line(lines[i], log, i + 1);
    claim_count_ = lines.size();
}

fs::path FileStore::context_path(const std::string& user_id) const {
    return root_ / "contexts" / (escape_user_id(user_id) + ".json");
}

std::optional<UserContext> FileStore::find_context(const std::string& user_id) {
    const auto path = context_path(user_id);
    if (!fs::exists(path)) return std::nullopt;
    const auto data = read_file(path);
    try {
        auto ctx = context_from_json(json::parse(data));
        if (ctx.user_id != user_id) throw Error("document belongs to user '" + ctx.user_id + "'");
        return ctx;
    } catch (const std::exception& e) {
        throw StorageUnavailable("corrupted context '" + path.string() + "': " + e.what());
    }
}

void FileStore::write_context(const UserContext& context) {
    replace_file(context_path(context.user_id), to_json(context).dump(2) + "\n");
}

std::uint64_t FileStore::next_claim_number() {
    return claim_count_ + 1;
}

void FileStore::append_claim(const claims::ClaimRecord& record) {
    const auto path = root_ / "claims" / "log.jsonl";
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) io_failure("cannot open", path);
    try {
        write_all(fd, claims::to_json(record).dump() + "\n", path);
        if (::fsync(fd) != 0) io_failure("cannot sync", path);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    ++claim_count_;
}

std::vector<claims::ClaimRecord> FileStore::claims() {
    std::lock_guard lock(claim_mutex_);
    const auto path = root_ / "claims" / "log.jsonl";
    const auto lines = read_lines(path);
    std::vector<claims::ClaimRecord> out;
    for (std::size_t i = 0; i < lines.size(); ++i) out.push_back(parse_claim_line(lines[i], path, i + 1));
    return out;
}

} // namespace claimflow::store
