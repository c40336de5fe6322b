#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "personakit/chat.hpp"

namespace personakit {

enum class GatewayMode { live, record, replay };

std::string_view to_string(GatewayMode mode);
GatewayMode parse_gateway_mode(std::string_view text);

struct CassetteEntry {
    std::string request_hash;
    json canonical_request;
    ChatResponse response;
    int shot = 0;
};

// Content-addressed store of request/response pairs. Each request hash maps
// to an ordered list of shots so repeated identical requests (iterations)
// replay in recorded order. On disk: append-only JSONL, one entry per line
// {request_hash, canonical_request, response, meta}.
//
// Thread-safe. Shot indices are handed out by reserve() so callers can fix
// the consumption order before any work is scheduled. A later line for the
// same (hash, shot) supersedes an earlier one, so re-recording into an
// existing file keeps it append-only.
class Cassette {
public:
    Cassette() = default;
    Cassette(const Cassette&) = delete;
    Cassette& operator=(const Cassette&) = delete;

    // Loads `path` if it exists. With `append` set, new entries are written
    // through to the file as they are recorded.
    static std::unique_ptr<Cassette> open(const std::filesystem::path& path, bool append);

    // Next shot index for this hash: 0, 1, 2, ... per hash.
    int reserve(const std::string& hash);

    // Recorded response for (hash, shot), or nullopt.
    std::optional<ChatResponse> lookup(const std::string& hash, int shot) const;
    std::size_t shot_count(const std::string& hash) const;

    void append(const ChatRequest& request, const ChatResponse& response, int shot);

    std::size_t size() const;
    std::vector<CassetteEntry> entries() const; // sorted by (hash, shot)
    // Digest of the sorted entries; independent of file line order.
    std::string digest() const;
    // Rewinds replay cursors; recorded data is kept.
    void rewind();
    const std::optional<std::filesystem::path>& path() const { return path_; }

private:
    void insert(CassetteEntry entry);

    mutable std::mutex mutex_;
    std::map<std::string, std::map<int, CassetteEntry>> entries_;
    std::map<std::string, int> cursors_;
    std::optional<std::filesystem::path> path_;
    std::ofstream out_;
};

} // namespace personakit
