#include "graphlay/graph.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace graphlay {

Graph Graph::from_edges(int num_nodes, std::vector<std::pair<int, int>> edges,
                        std::vector<std::string> labels) {
  if (num_nodes <= 0) throw InputError("graph must have at least one node");
  for (auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes)
      throw InputError("edge endpoint out of range: " + std::to_string(u) + " " +
                       std::to_string(v));
    if (u == v) throw InputError("self-loop on node " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  if (!is_connected(num_nodes, edges)) {
    // Name the components in the error message.
    std::vector<int> comp(num_nodes, -1);
    std::vector<std::vector<int>> adj(num_nodes);
    for (auto [u, v] : edges) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    int ncomp = 0;
    std::vector<int> sizes;
    for (int s = 0; s < num_nodes; ++s) {
      if (comp[s] >= 0) continue;
      int size = 0;
      std::vector<int> stack{s};
      comp[s] = ncomp;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        ++size;
        for (int w : adj[u])
          if (comp[w] < 0) {
            comp[w] = ncomp;
            stack.push_back(w);
          }
      }
      sizes.push_back(size);
      ++ncomp;
    }
    std::ostringstream msg;
    msg << "graph is disconnected: " << ncomp << " components (sizes";
    for (int s : sizes) msg << ' ' << s;
    msg << ")";
    throw DisconnectedError(msg.str());
  }

  Graph g;
  g.num_nodes_ = num_nodes;
  g.edges_ = std::move(edges);
  g.adj_.resize(num_nodes);
  for (auto [u, v] : g.edges_) {
    g.adj_[u].push_back(v);
    g.adj_[v].push_back(u);
  }
  for (auto& nb : g.adj_) std::sort(nb.begin(), nb.end());
  if (labels.empty()) {
    labels.resize(num_nodes);
    for (int i = 0; i < num_nodes; ++i) labels[i] = std::to_string(i);
  } else if (static_cast<int>(labels.size()) != num_nodes) {
    throw InputError("label table size does not match node count");
  }
  g.labels_ = std::move(labels);
  return g;
}

std::uint64_t Graph::content_hash() const {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(num_nodes_));
  for (auto [u, v] : edges_) {
    h = splitmix64(h ^ (static_cast<std::uint64_t>(u) << 32 | static_cast<std::uint32_t>(v)));
  }
  return h;
}

bool is_connected(int num_nodes, const std::vector<std::pair<int, int>>& edges) {
  if (num_nodes <= 0) return false;
  if (num_nodes == 1) return true;
  std::vector<std::vector<int>> adj(num_nodes);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) return false;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<char> seen(num_nodes, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int w : adj[u])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count == num_nodes;
}

DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  s.min = g.degree(0);
  s.max = g.degree(0);
  long long total = 0;
  for (int v = 0; v < g.num_nodes(); ++v) {
    const int d = g.degree(v);
    s.min = std::min(s.min, d);
    s.max = std::max(s.max, d);
    total += d;
  }
  s.mean = static_cast<double>(total) / g.num_nodes();
  return s;
}

int DistanceMatrix::max_distance() const {
  int m = 0;
  for (int v : d_) m = std::max(m, v);
  return m;
}

namespace {

// Single-source BFS writing hop counts into `row` (length n, pre-sized).
void bfs_row(const Graph& g, int source, int* row, std::vector<int>& queue) {
  const int n = g.num_nodes();
  for (int i = 0; i < n; ++i) row[i] = -1;
  queue.clear();
  queue.push_back(source);
  row[source] = 0;
  for (size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    const int du = row[u];
    for (int w : g.neighbors(u)) {
      if (row[w] < 0) {
        row[w] = du + 1;
        queue.push_back(w);
      }
    }
  }
}

}  // namespace

DistanceMatrix all_pairs_bfs(const Graph& g) {
  const int n = g.num_nodes();
  DistanceMatrix d(n);
#pragma omp parallel
  {
    std::vector<int> queue;
    queue.reserve(n);
#pragma omp for schedule(static)
    for (int s = 0; s < n; ++s) bfs_row(g, s, &d.at(s, 0), queue);
  }
  return d;
}

namespace serial {

DistanceMatrix all_pairs_bfs(const Graph& g) {
  const int n = g.num_nodes();
  DistanceMatrix d(n);
  std::vector<int> queue;
  queue.reserve(n);
  for (int s = 0; s < n; ++s) bfs_row(g, s, &d.at(s, 0), queue);
  return d;
}

}  // namespace serial

namespace {

std::string strip(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_index(const std::string& tok, int& out) {
  if (tok.empty()) return false;
  long long v = 0;
  for (char c : tok) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + (c - '0');
    if (v > 1'000'000'000LL) return false;
  }
  out = static_cast<int>(v);
  return true;
}

}  // namespace

Graph parse_edge_list(std::istream& in) {
  std::vector<std::pair<int, int>> edges;
  int max_index = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = strip(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, extra;
    ls >> a >> b;
    if (ls >> extra)
      throw ParseError("line " + std::to_string(line_no) + ": expected \"u v\", got extra token");
    int u, v;
    if (!parse_index(a, u) || !parse_index(b, v))
      throw ParseError("line " + std::to_string(line_no) + ": malformed edge \"" + line + "\"");
    if (u == v)
      throw ParseError("line " + std::to_string(line_no) + ": self-loop on node " +
                       std::to_string(u));
    edges.emplace_back(u, v);
    max_index = std::max(max_index, std::max(u, v));
  }
  if (edges.empty()) throw ParseError("empty edge list");
  return Graph::from_edges(max_index + 1, std::move(edges));
}

Graph parse_edge_list_text(const std::string& text) {
  std::istringstream in(text);
  return parse_edge_list(in);
}

namespace {

struct XmlTag {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  bool closing = false;      // </name>
  bool self_closing = false; // <name ... />

  const std::string* attr(const std::string& key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return &v;
    return nullptr;
  }
};

// Minimal tag scanner for the GraphML subset. Skips declarations and
// comments; does not expand entities (Rome-style files contain none).
class XmlScanner {
 public:
  explicit XmlScanner(const std::string& text) : text_(text) {}

  bool next(XmlTag& tag) {
    while (true) {
      const size_t lt = text_.find('<', pos_);
      if (lt == std::string::npos) return false;
      if (text_.compare(lt, 4, "<!--") == 0) {
        const size_t end = text_.find("-->", lt + 4);
        if (end == std::string::npos) throw ParseError("unterminated XML comment");
        pos_ = end + 3;
        continue;
      }
      if (text_.compare(lt, 2, "<?") == 0) {
        const size_t end = text_.find("?>", lt + 2);
        if (end == std::string::npos) throw ParseError("unterminated XML declaration");
        pos_ = end + 2;
        continue;
      }
      if (text_.compare(lt, 2, "<!") == 0) {  // DOCTYPE etc.
        const size_t end = text_.find('>', lt + 2);
        if (end == std::string::npos) throw ParseError("unterminated XML directive");
        pos_ = end + 1;
        continue;
      }
      const size_t gt = text_.find('>', lt + 1);
      if (gt == std::string::npos) throw ParseError("unterminated XML tag");
      parse_tag(text_.substr(lt + 1, gt - lt - 1), tag);
      pos_ = gt + 1;
      return true;
    }
  }

 private:
  void parse_tag(std::string body, XmlTag& tag) const {
    tag = XmlTag{};
    body = strip(body);
    if (body.empty()) throw ParseError("empty XML tag");
    if (body.front() == '/') {
      tag.closing = true;
      body = strip(body.substr(1));
    }
    if (!body.empty() && body.back() == '/') {
      tag.self_closing = true;
      body = strip(body.substr(0, body.size() - 1));
    }
    size_t i = 0;
    while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    tag.name = body.substr(0, i);
    if (tag.name.empty()) throw ParseError("nameless XML tag");
    // Attributes: key="value" or key='value'.
    while (i < body.size()) {
      while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
      if (i >= body.size()) break;
      size_t eq = body.find('=', i);
      if (eq == std::string::npos)
        throw ParseError("malformed attribute in <" + tag.name + ">");
      std::string key = strip(body.substr(i, eq - i));
      size_t q = eq + 1;
      while (q < body.size() && std::isspace(static_cast<unsigned char>(body[q]))) ++q;
      if (q >= body.size() || (body[q] != '"' && body[q] != '\''))
        throw ParseError("unquoted attribute value in <" + tag.name + ">");
      const char quote = body[q];
      const size_t end = body.find(quote, q + 1);
      if (end == std::string::npos)
        throw ParseError("unterminated attribute value in <" + tag.name + ">");
      tag.attrs.emplace_back(std::move(key), body.substr(q + 1, end - q - 1));
      i = end + 1;
    }
  }

  const std::string& text_;
  size_t pos_ = 0;
};

}  // namespace

Graph parse_graphml_text(const std::string& text) {
  XmlScanner scanner(text);
  XmlTag tag;
  bool in_graph = false;
  bool saw_graph = false;
  std::vector<std::string> node_ids;
  std::vector<std::pair<std::string, std::string>> raw_edges;

  while (scanner.next(tag)) {
    if (tag.name == "graph") {
      if (tag.closing) {
        in_graph = false;
      } else {
        if (saw_graph) throw ParseError("multiple <graph> elements");
        in_graph = true;
        saw_graph = true;
      }
      continue;
    }
    if (!in_graph || tag.closing) continue;
    if (tag.name == "node") {
      const std::string* id = tag.attr("id");
      if (!id) throw ParseError("<node> without id attribute");
      node_ids.push_back(*id);
    } else if (tag.name == "edge") {
      const std::string* s = tag.attr("source");
      const std::string* t = tag.attr("target");
      if (!s || !t) throw ParseError("<edge> without source/target");
      raw_edges.emplace_back(*s, *t);
    }
    // Anything else (<data>, <key>, ...) is ignored.
  }
  if (!saw_graph) throw ParseError("no <graph> element found");
  if (node_ids.empty()) throw ParseError("GraphML document declares no nodes");

  std::vector<std::string> sorted_ids = node_ids;
  std::sort(sorted_ids.begin(), sorted_ids.end());
  if (std::adjacent_find(sorted_ids.begin(), sorted_ids.end()) != sorted_ids.end())
    throw ParseError("duplicate node id in GraphML document");

  auto index_of = [&](const std::string& id) {
    const auto it = std::lower_bound(sorted_ids.begin(), sorted_ids.end(), id);
    if (it == sorted_ids.end() || *it != id)
      throw ParseError("edge references undeclared node id \"" + id + "\"");
    return *it;
  };
  // Dense indices follow document order.
  std::vector<std::pair<std::string, int>> order;
  order.reserve(node_ids.size());
  for (int i = 0; i < static_cast<int>(node_ids.size()); ++i)
    order.emplace_back(node_ids[i], i);
  std::sort(order.begin(), order.end());
  auto doc_index = [&](const std::string& id) {
    index_of(id);
    const auto it = std::lower_bound(
        order.begin(), order.end(), std::make_pair(id, -1),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    return it->second;
  };

  std::vector<std::pair<int, int>> edges;
  edges.reserve(raw_edges.size());
  for (const auto& [s, t] : raw_edges) {
    const int u = doc_index(s);
    const int v = doc_index(t);
    if (u == v) throw ParseError("self-loop on node id \"" + s + "\"");
    edges.emplace_back(u, v);
  }
  return Graph::from_edges(static_cast<int>(node_ids.size()), std::move(edges),
                           std::move(node_ids));
}

Graph parse_graphml(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graphml_text(buf.str());
}

Graph load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open graph file: " + path);
  const bool graphml = path.size() >= 8 && path.compare(path.size() - 8, 8, ".graphml") == 0;
  const bool xml = path.size() >= 4 && path.compare(path.size() - 4, 4, ".xml") == 0;
  try {
    if (graphml || xml) return parse_graphml(in);
    return parse_edge_list(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string to_edge_list(const Graph& g) {
  std::ostringstream out;
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

}  // namespace graphlay
