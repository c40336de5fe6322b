#include "personakit/cassette.hpp"

#include "personakit/error.hpp"

#include <sstream>

namespace personakit {

std::string_view to_string(GatewayMode mode) {
    switch (mode) {
    case GatewayMode::live:
        return "live";
    case GatewayMode::record:
        return "record";
    case GatewayMode::replay:
        return "replay";
    }
    return "?";
}

GatewayMode parse_gateway_mode(std::string_view text) {
    if (text == "live") {
        return GatewayMode::live;
    }
    if (text == "record") {
        return GatewayMode::record;
    }
    if (text == "replay") {
        return GatewayMode::replay;
    }
    throw ConfigError("unknown mode '" + std::string(text) + "' (expected live, record or replay)");
}

std::unique_ptr<Cassette> Cassette::open(const std::filesystem::path& path, bool append) {
    auto cassette = std::make_unique<Cassette>();
    cassette->path_ = path;
    if (std::filesystem::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) {
                continue;
            }
            try {
                const json doc = json::parse(line);
                CassetteEntry entry;
                entry.request_hash = doc.at("request_hash").get<std::string>();
                entry.canonical_request = doc.at("canonical_request");
                entry.response = response_from_json(doc.at("response"));
                entry.shot = doc.at("meta").at("shot").get<int>();
                const std::string computed = sha256_hex(entry.canonical_request.dump());
                if (computed != entry.request_hash) {
                    throw ParseError(path.string() + ":" + std::to_string(line_no),
                                     "request_hash does not match canonical_request");
                }
                cassette->insert(std::move(entry));
            } catch (const json::exception& e) {
                throw ParseError(path.string() + ":" + std::to_string(line_no), e.what());
            }
        }
    } else if (!append) {
        throw ConfigError("cassette not found: " + path.string());
    }
    if (append) {
        if (path.has_parent_path()) {
            std::filesystem::create_directories(path.parent_path());
        }
        cassette->out_.open(path, std::ios::binary | std::ios::app);
        if (!cassette->out_) {
            throw ConfigError("cannot open cassette for writing: " + path.string());
        }
    }
    return cassette;
}

void Cassette::insert(CassetteEntry entry) {
    entry.response.request_hash = entry.request_hash;
    entry.response.shot = entry.shot;
    auto& shots = entries_[entry.request_hash];
    shots.insert_or_assign(entry.shot, std::move(entry));
}

int Cassette::reserve(const std::string& hash) {
    std::lock_guard lock(mutex_);
    return cursors_[hash]++;
}

std::optional<ChatResponse> Cassette::lookup(const std::string& hash, int shot) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(hash);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    const auto shot_it = it->second.find(shot);
    if (shot_it == it->second.end()) {
        return std::nullopt;
    }
    return shot_it->second.response;
}

std::size_t Cassette::shot_count(const std::string& hash) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(hash);
    return it == entries_.end() ? 0 : it->second.size();
}

void Cassette::append(const ChatRequest& request, const ChatResponse& response, int shot) {
    CassetteEntry entry;
    entry.canonical_request = canonical_json(request);
    entry.request_hash = sha256_hex(entry.canonical_request.dump());
    entry.response = response;
    entry.shot = shot;
    const json line = {{"request_hash", entry.request_hash},
                       {"canonical_request", entry.canonical_request},
                       {"response", response_to_json(response)},
                       {"meta", {{"shot", shot}, {"model_id", request.model_id}}}};
    std::lock_guard lock(mutex_);
    if (out_.is_open()) {
        out_ << line.dump() << '\n';
        out_.flush();
    }
    insert(std::move(entry));
}

std::size_t Cassette::size() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [hash, shots] : entries_) {
        n += shots.size();
    }
    return n;
}

std::vector<CassetteEntry> Cassette::entries() const {
    std::lock_guard lock(mutex_);
    std::vector<CassetteEntry> out;
    for (const auto& [hash, shots] : entries_) {
        for (const auto& [shot, entry] : shots) {
            out.push_back(entry);
        }
    }
    return out;
}

std::string Cassette::digest() const {
    std::string material;
    for (const auto& entry : entries()) {
        material += entry.request_hash + ' ' + std::to_string(entry.shot) + ' ' + sha256_hex(entry.response.text) + '\n';
    }
    return sha256_hex(material);
}

void Cassette::rewind() {
    std::lock_guard lock(mutex_);
    cursors_.clear();
}

} // namespace personakit
