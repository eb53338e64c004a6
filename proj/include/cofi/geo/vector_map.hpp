#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/core/types.hpp"

namespace cofi::geo {

using TagSet = std::set<std::string>;

struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Connected component of the vertex/edge graph.
struct Feature {
    std::vector<std::size_t> vertices;
    std::vector<std::size_t> edges;
    TagSet tags;
    /// Every vertex has even, nonzero degree: the edges form closed rings
    /// and the feature has an interior.
    bool closed = false;
};

/// Everything about a map except vertex coordinates. Shared between a map
/// and all of its perturbed variants.
struct MapTopology {
    std::vector<Edge> edges;
    std::vector<TagSet> vertex_tags;
    std::vector<std::optional<double>> vertex_depth;
    std::vector<std::size_t> feature_of_vertex;
    std::vector<Feature> features;
    std::map<std::string, std::vector<std::size_t>> features_by_tag;
};

/// Tagged vector map M = (V, E, rho) in the local metric frame.
///
/// Vertices joined by an edge path form one feature; a feature's tags are
/// the union of its vertices' tags. Immutable after construction.
class VectorMap {
public:
    VectorMap() : topo_(std::make_shared<MapTopology>()) {}

    VectorMap(std::vector<Vec2> vertices, std::vector<Edge> edges,
              std::vector<TagSet> vertex_tags,
              std::vector<std::optional<double>> vertex_depth = {})
        : vertices_(std::move(vertices)) {
        auto topo = std::make_shared<MapTopology>();
        topo->edges = std::move(edges);
        topo->vertex_tags = std::move(vertex_tags);
        topo->vertex_depth = std::move(vertex_depth);
        const std::size_t n = vertices_.size();
        if (topo->vertex_depth.empty()) topo->vertex_depth.resize(n);
        if (topo->vertex_tags.size() != n || topo->vertex_depth.size() != n)
            throw ConfigError("vector map: per-vertex attribute count does not match vertex count");
        for (const auto& v : vertices_)
            if (!v.allFinite()) throw ConfigError("vector map: non-finite vertex coordinate");
        for (const auto& e : topo->edges)
            if (e.a >= n || e.b >= n) throw ConfigError("vector map: edge index out of range");
        build_features(*topo);
        topo_ = std::move(topo);
    }

    const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
    const std::vector<Edge>& edges() const noexcept { return topo_->edges; }
    const std::vector<Feature>& features() const noexcept { return topo_->features; }
    std::size_t feature_of_vertex(std::size_t v) const { return topo_->feature_of_vertex.at(v); }
    const TagSet& tags_of_feature(std::size_t f) const { return topo_->features.at(f).tags; }
    const std::optional<double>& vertex_depth(std::size_t v) const { return topo_->vertex_depth.at(v); }
    const std::vector<TagSet>& vertex_tags() const noexcept { return topo_->vertex_tags; }
    const std::vector<std::optional<double>>& vertex_depths() const noexcept { return topo_->vertex_depth; }

    /// Feature ids carrying `tag`; empty when the tag is absent.
    const std::vector<std::size_t>& features_with_tag(const std::string& tag) const {
        static const std::vector<std::size_t> none;
        auto it = topo_->features_by_tag.find(tag);
        return it == topo_->features_by_tag.end() ? none : it->second;
    }

    TagSet all_tags() const {
        TagSet out;
        for (const auto& [tag, _] : topo_->features_by_tag) out.insert(tag);
        return out;
    }

    /// Same topology and attributes, new coordinates.
    VectorMap with_vertices(std::vector<Vec2> moved) const {
        if (moved.size() != vertices_.size())
            throw InvariantViolation("vector map: variant vertex count differs from source");
        VectorMap out;
        out.vertices_ = std::move(moved);
        out.topo_ = topo_;
        return out;
    }

    bool shares_topology_with(const VectorMap& other) const noexcept { return topo_ == other.topo_; }

private:
    static void build_features(MapTopology& t) {
        const std::size_t n = t.vertex_tags.size();
        std::vector<std::size_t> parent(n);
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& e : t.edges) {
            auto ra = find(e.a), rb = find(e.b);
            if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
        // Feature ids are assigned in order of each component's smallest vertex.
        std::vector<std::size_t> id_of_root(n, n);
        t.feature_of_vertex.assign(n, 0);
        for (std::size_t v = 0; v < n; ++v) {
            auto r = find(v);
            if (id_of_root[r] == n) {
                id_of_root[r] = t.features.size();
                t.features.emplace_back();
            }
            const auto f = id_of_root[r];
            t.feature_of_vertex[v] = f;
            t.features[f].vertices.push_back(v);
            t.features[f].tags.insert(t.vertex_tags[v].begin(), t.vertex_tags[v].end());
        }
        std::vector<int> degree(n, 0);
        for (std::size_t i = 0; i < t.edges.size(); ++i) {
            const auto& e = t.edges[i];
            t.features[t.feature_of_vertex[e.a]].edges.push_back(i);
            ++degree[e.a];
            ++degree[e.b];
        }
        for (std::size_t f = 0; f < t.features.size(); ++f) {
            auto& feat = t.features[f];
            if (feat.tags.empty())
                throw ConfigError("vector map: feature " + std::to_string(f) + " has no tags");
            feat.closed = !feat.edges.empty();
            for (auto v : feat.vertices)
                if (degree[v] == 0 || degree[v] % 2 != 0) feat.closed = false;
            for (const auto& tag : feat.tags) t.features_by_tag[tag].push_back(f);
        }
    }

    std::vector<Vec2> vertices_;
    std::shared_ptr<const MapTopology> topo_;
};

/// Incremental construction of a VectorMap from points, polylines and rings.
class MapBuilder {
public:
    std::size_t add_point(const Vec2& p, const TagSet& tags, std::optional<double> depth = {}) {
        vertices_.push_back(p);
        tags_.push_back(tags);
        depth_.push_back(depth);
        return vertices_.size() - 1;
    }

    void add_polyline(const std::vector<Vec2>& pts, const TagSet& tags) {
        if (pts.empty()) return;
        std::size_t prev = add_point(pts.front(), tags);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            auto cur = add_point(pts[i], tags);
            edges_.push_back({prev, cur});
            prev = cur;
        }
    }

    /// Closed ring; a repeated closing vertex is dropped.
    void add_polygon(std::vector<Vec2> ring, const TagSet& tags) {
        if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
        if (ring.size() < 3) throw ConfigError("polygon ring needs at least 3 distinct vertices");
        const std::size_t first = vertices_.size();
        for (const auto& p : ring) add_point(p, tags);
        for (std::size_t i = 0; i < ring.size(); ++i)
            edges_.push_back({first + i, first + (i + 1) % ring.size()});
    }

    VectorMap build() const { return VectorMap(vertices_, edges_, tags_, depth_); }

private:
    std::vector<Vec2> vertices_;
    std::vector<Edge> edges_;
    std::vector<TagSet> tags_;
    std::vector<std::optional<double>> depth_;
};

}  // namespace cofi::geo
