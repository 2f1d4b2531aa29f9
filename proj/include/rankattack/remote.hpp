#pragma once

#include <cmath>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "rankattack/embedding.hpp"
#include "rankattack/error.hpp"

namespace rankattack {

inline constexpr std::size_t kRemoteBatchSize = 32;
inline constexpr std::size_t kRemoteMaxTextBytes = 100 * 1024;

struct HealthInfo {
    std::size_t dim = 0;
    std::string model;
};

namespace detail {

inline httplib::Client make_client(const std::string& endpoint) {
    if (endpoint.rfind("http://", 0) != 0) throw ArgumentError("endpoint must be an http:// URL: " + endpoint);
    httplib::Client cli(endpoint);
    if (!cli.is_valid()) throw ArgumentError("invalid endpoint: " + endpoint);
    cli.set_connection_timeout(5, 0);
    cli.set_read_timeout(120, 0);
    cli.set_write_timeout(30, 0);
    return cli;
}

inline std::string server_error_message(const httplib::Result& res) {
    std::string msg = "HTTP " + std::to_string(res->status);
    try {
        auto j = nlohmann::json::parse(res->body);
        if (j.is_object() && j.contains("error") && j["error"].is_string())
            msg += ": " + j["error"].get<std::string>();
    } catch (const nlohmann::json::exception&) {
    }
    return msg;
}

/// One POST /embed round trip. Returns (dim, vectors); validates shape.
inline std::pair<std::size_t, std::vector<EmbeddingVector>> post_embed(
    const std::string& endpoint, std::span<const std::string> texts) {
    auto cli = make_client(endpoint);
    const nlohmann::json body = {{"texts", texts}};
    auto res = cli.Post("/embed", body.dump(), "application/json");
    if (!res) throw TransportError("POST " + endpoint + "/embed failed", httplib::to_string(res.error()));
    if (res->status == 400) throw BackendError("embedding service rejected request: " + server_error_message(res));
    if (res->status >= 500) throw BackendError("embedding service failure: " + server_error_message(res));
    if (res->status != 200) throw ProtocolError("unexpected status: " + server_error_message(res));

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("response is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("dim") || !j.contains("vectors") ||
        !j["dim"].is_number_integer() || !j["vectors"].is_array())
        throw ProtocolError("response missing dim/vectors");
    const auto dim_signed = j["dim"].get<long long>();
    if (dim_signed <= 0) throw ProtocolError("response dim must be positive");
    const auto dim = static_cast<std::size_t>(dim_signed);
    const auto& arr = j["vectors"];
    if (arr.size() != texts.size())
        throw ProtocolError("response has " + std::to_string(arr.size()) + " vectors for " +
                            std::to_string(texts.size()) + " texts");
    std::vector<EmbeddingVector> out;
    out.reserve(arr.size());
    for (const auto& row : arr) {
        if (!row.is_array() || row.size() != dim) throw ProtocolError("vector length does not match dim");
        std::vector<double> v;
        v.reserve(dim);
        for (const auto& x : row) {
            if (!x.is_number()) throw ProtocolError("non-numeric vector entry");
            const double d = x.get<double>();
            if (!std::isfinite(d)) throw ProtocolError("non-finite vector entry");
            v.push_back(d);
        }
        out.emplace_back(std::move(v));
    }
    return {dim, std::move(out)};
}

}  // namespace detail

/// GET /health.
inline HealthInfo remote_health(const std::string& endpoint) {
    auto cli = detail::make_client(endpoint);
    auto res = cli.Get("/health");
    if (!res) throw TransportError("GET " + endpoint + "/health failed", httplib::to_string(res.error()));
    if (res->status != 200) throw BackendError("embedding service not ready: " + detail::server_error_message(res));
    try {
        auto j = nlohmann::json::parse(res->body);
        HealthInfo h{j.at("dim").get<std::size_t>(), j.value("model", std::string{})};
        if (h.dim == 0) throw ProtocolError("health reports dim 0");
        return h;
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed /health response: ") + e.what());
    }
}

/// Embeds texts through the wire protocol, splitting into batches of 32.
/// Either every vector is returned or an error is thrown; partial results
/// are never surfaced.
inline std::vector<EmbeddingVector> embed_remote(const std::string& endpoint,
                                                 std::span<const std::string> texts) {
    if (texts.empty()) throw ArgumentError("embed_remote: empty text list");
    for (const auto& t : texts) {
        if (t.size() > kRemoteMaxTextBytes) throw ArgumentError("embed_remote: text exceeds 100 KB");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    std::size_t dim = 0;
    for (std::size_t start = 0; start < texts.size(); start += kRemoteBatchSize) {
        const auto count = std::min(kRemoteBatchSize, texts.size() - start);
        auto [batch_dim, vectors] = detail::post_embed(endpoint, texts.subspan(start, count));
        if (dim == 0) dim = batch_dim;
        if (batch_dim != dim) throw ProtocolError("dim changed between batches");
        for (auto& v : vectors) out.push_back(std::move(v));
    }
    return out;
}

/// Remote backend with a whole-run in-memory memo keyed by text.
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(std::string endpoint)
        : endpoint_(std::move(endpoint)), health_(remote_health(endpoint_)) {}

    std::size_t dim() const override { return health_.dim; }

    EmbeddingVector embed(std::string_view text) const override {
        const std::string t(text);
        return embed_batch(std::span(&t, 1)).front();
    }

    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override {
        std::vector<EmbeddingVector> out(texts.size());
        std::vector<std::string> missing;
        std::vector<std::size_t> missing_pos;
        {
            std::lock_guard lock(mutex_);
            for (std::size_t i = 0; i < texts.size(); ++i) {
                if (auto it = memo_.find(texts[i]); it != memo_.end()) {
                    out[i] = it->second;
                } else {
                    missing.push_back(texts[i]);
                    missing_pos.push_back(i);
                }
            }
        }
        if (missing.empty()) return out;
        auto fetched = embed_remote(endpoint_, missing);
        for (const auto& v : fetched) {
            if (v.dim() != health_.dim) throw ProtocolError("service dim differs from /health dim");
        }
        std::lock_guard lock(mutex_);
        for (std::size_t k = 0; k < fetched.size(); ++k) {
            memo_.insert_or_assign(missing[k], fetched[k]);
            out[missing_pos[k]] = std::move(fetched[k]);
        }
        return out;
    }

    BackendDescriptor descriptor() const override {
        return {BackendKind::Remote, health_.dim, {{"endpoint", endpoint_}, {"model", health_.model}}};
    }

private:
    std::string endpoint_;
    HealthInfo health_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<std::string, EmbeddingVector> memo_;
};

}  // namespace rankattack
