#include "autohist/labeling.hpp"

#include "autohist/remote.hpp"
#include "autohist/unicode.hpp"
#include "data_assets.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <mutex>
#include <thread>

namespace autohist {

namespace {

constexpr std::string_view kEntitiesPlaceholder = "{{entities}}";

std::string strip_comment_lines(std::string_view content)
{
    std::string out;
    std::size_t start = 0;
    while (start < content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string_view::npos) {
            end = content.size();
        }
        auto const line = content.substr(start, end - start);
        if (!line.starts_with('#')) {
            out.append(line);
            out.push_back('\n');
        }
        start = end + 1;
    }
    while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) {
        out.pop_back();
    }
    return out;
}

std::string ascii_lower(std::string_view s)
{
    std::string out(s);
    for (auto & c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string_view strip_quotes(std::string_view s)
{
    static constexpr std::pair<std::string_view, std::string_view> kPairs[] = {
        {"\"", "\""}, {"'", "'"}, {"`", "`"}, {"“", "”"}, {"‘", "’"}};
    bool changed = true;
    while (changed) {
        changed = false;
        s = text::trim(s);
        for (auto const & [open, close] : kPairs) {
            if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
                s = s.substr(open.size(), s.size() - open.size() - close.size());
                changed = true;
                break;
            }
        }
    }
    return s;
}

/// First `max_chars` code points.
std::string_view truncate_code_points(std::string_view s, std::size_t max_chars)
{
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
            if (count == max_chars) {
                return s.substr(0, i);
            }
            ++count;
        }
    }
    return s;
}

}  // namespace

std::string_view label_prompt_template()
{
    static std::string const text = strip_comment_lines(data::kLabelPromptV1);
    return text;
}

std::string_view label_prompt_template_id() { return "label-prompt-v1"; }

std::string build_label_prompt(std::span<std::string const> entity_surfaces)
{
    if (entity_surfaces.empty()) {
        throw std::invalid_argument("build_label_prompt needs at least one entity");
    }
    std::string list;
    for (std::size_t i = 0; i < entity_surfaces.size(); ++i) {
        if (i) {
            list += ", ";
        }
        list += entity_surfaces[i];
    }
    std::string prompt(label_prompt_template());
    auto const at = prompt.find(kEntitiesPlaceholder);
    prompt.replace(at, kEntitiesPlaceholder.size(), list);
    return prompt;
}

std::optional<std::string> parse_label_response(std::string_view raw)
{
    auto s = text::trim(raw);
    s = s.substr(0, s.find('\n'));
    s = strip_quotes(s);
    s = text::trim(truncate_code_points(s, kMaxLabelLength));
    if (s.empty()) {
        return std::nullopt;
    }
    auto const lowered = ascii_lower(s);
    if (lowered == "no label" || lowered == "none") {
        return std::nullopt;
    }
    return std::string(s);
}

std::string StubLabelProvider::complete(LabelRequest const & request)
{
    auto const & members = request.members;
    if (members.empty()) {
        return "no label";
    }
    if (members.size() >= 2) {
        std::vector<EmbeddingVector> vectors;
        for (auto const & m : members) {
            vectors.push_back(StubEmbeddingProvider::embed_one(m.surface));
        }
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            for (std::size_t j = i + 1; j < vectors.size(); ++j) {
                sum += cosine_similarity(vectors[i], vectors[j]);
                ++pairs;
            }
        }
        if (sum / static_cast<double>(pairs) < kCoherenceThreshold) {
            return "no label";
        }
    }
    auto const top = std::min_element(members.begin(), members.end(), [](auto const & a, auto const & b) {
        return a.frequency != b.frequency ? a.frequency > b.frequency : a.surface < b.surface;
    });
    return top->surface + " group";
}

std::vector<LabelMember> prompt_members(Cluster const & cluster, EntityTable const & table)
{
    std::vector<LabelMember> members;
    members.reserve(cluster.entity_ids.size());
    for (auto id : cluster.entity_ids) {
        auto const & e = table.at(id);
        members.push_back(LabelMember{e.text(), e.frequency});
    }
    std::sort(members.begin(), members.end(), [](auto const & a, auto const & b) {
        return a.frequency != b.frequency ? a.frequency > b.frequency : a.surface < b.surface;
    });
    if (members.size() > kMaxPromptEntities) {
        members.resize(kMaxPromptEntities);
    }
    return members;
}

std::vector<LabeledCluster> label_clusters(
    ClusterSet const & clusters,
    EntityTable const & table,
    LabelProvider & provider,
    std::size_t parallelism,
    LabelingReport * report)
{
    auto const n = clusters.clusters.size();
    for (auto const & c : clusters.clusters) {
        for (auto id : c.entity_ids) {
            if (!table.contains(id)) {
                throw std::invalid_argument("cluster references unknown entity id " + std::to_string(id));
            }
        }
    }

    struct Outcome
    {
        std::optional<std::string> label;
        std::optional<std::string> failure;
    };
    std::vector<Outcome> outcomes(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (auto i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            auto const & cluster = clusters.clusters[i];
            LabelRequest request;
            request.members = prompt_members(cluster, table);
            std::vector<std::string> surfaces;
            for (auto const & m : request.members) {
                surfaces.push_back(m.surface);
            }
            request.prompt = build_label_prompt(surfaces);
            try {
                outcomes[i].label = parse_label_response(provider.complete(request));
            } catch (std::exception const & e) {
                outcomes[i].failure = e.what();
            }
        }
    };
    auto const threads = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    LabelingReport local;
    std::vector<LabeledCluster> labeled;
    for (std::size_t i = 0; i < n; ++i) {
        auto const & cluster = clusters.clusters[i];
        if (outcomes[i].failure) {
            ++local.failed;
            ++local.no_label;
            local.warnings.push_back(
                "labeling failed for cluster " + std::to_string(i) + " (cutoff " + std::to_string(cluster.cutoff)
                + ", " + std::to_string(cluster.entity_ids.size()) + " entities): " + *outcomes[i].failure);
            continue;
        }
        if (!outcomes[i].label) {
            ++local.no_label;
            continue;
        }
        ++local.labeled;
        labeled.push_back(LabeledCluster{cluster, std::move(*outcomes[i].label)});
    }
    if (report) {
        *report = std::move(local);
    }
    return labeled;
}

}  // namespace autohist
