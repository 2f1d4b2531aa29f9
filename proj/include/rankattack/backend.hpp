#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "rankattack/embedding.hpp"
#include "rankattack/error.hpp"
#include "rankattack/remote.hpp"
#include "rankattack/text.hpp"

namespace rankattack {

struct BackendOptions {
    BackendKind kind = BackendKind::TfIdf;
    std::size_t hashed_dim = 256;
    std::uint64_t hashed_seed = 0;
    std::string endpoint = "http://127.0.0.1:8080";
};

/// TF-IDF is fitted on fit_corpus; the hashed backend ignores it; the
/// remote backend contacts the service's /health endpoint immediately.
inline std::shared_ptr<const Embedder> make_backend(const BackendOptions& opt, std::span<const Document> fit_corpus,
                                                    const StopwordSet& stopwords) {
    switch (opt.kind) {
        case BackendKind::TfIdf:
            return std::make_shared<TfIdfEmbedder>(fit_tfidf(fit_corpus, stopwords), stopwords);
        case BackendKind::HashedProjection:
            return std::make_shared<HashedEmbedder>(opt.hashed_seed, opt.hashed_dim, stopwords);
        case BackendKind::Remote:
            return std::make_shared<RemoteEmbedder>(opt.endpoint);
    }
    throw ArgumentError("unknown backend kind");
}

}  // namespace rankattack
