#include "rbfloi/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <utility>

#include "rbfloi/errors.hpp"

namespace rbfloi {

namespace {

constexpr int kLeafSize = 16;

using Candidate = std::pair<double, int>;  // (squared distance, index)

double box_distance2(const Vec3& q, const Vec3& lo, const Vec3& hi) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    double d = 0.0;
    if (q[a] < lo[a]) d = lo[a] - q[a];
    else if (q[a] > hi[a]) d = q[a] - hi[a];
    d2 += d * d;
  }
  return d2;
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points), order_(points.size()) {
  std::iota(order_.begin(), order_.end(), 0);
  if (!points.empty()) {
    nodes_.reserve(2 * points.size() / kLeafSize + 2);
    build(0, static_cast<int>(points.size()));
  }
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  Node fresh;
  fresh.begin = begin;
  fresh.end = end;
  nodes_.push_back(fresh);
  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  nodes_[id].lo = lo;
  nodes_[id].hi = hi;
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<int> KdTree::knn(const Vec3& q, int k) const {
  if (k < 0 || static_cast<std::size_t>(k) > points_.size()) {
    throw Error(ErrorKind::config, "knn: k exceeds point count");
  }
  if (k == 0) return {};
  // Max-heap on (distance, index); lexicographic order breaks ties by index.
  std::priority_queue<Candidate> heap;
  auto worse_than_heap = [&](const Candidate& c) {
    return static_cast<int>(heap.size()) == k && !(c < heap.top());
  };

  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    const double bd = box_distance2(q, node.lo, node.hi);
    if (static_cast<int>(heap.size()) == k && bd > heap.top().first) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        const Candidate c{(points_[idx] - q).squaredNorm(), idx};
        if (worse_than_heap(c)) continue;
        heap.push(c);
        if (static_cast<int>(heap.size()) > k) heap.pop();
      }
      continue;
    }
    // Visit the nearer child first.
    const bool go_left = q[node.axis] < node.split;
    stack.push_back(go_left ? node.right : node.left);
    stack.push_back(go_left ? node.left : node.right);
  }

  std::vector<int> out(heap.size());
  for (auto it = out.rbegin(); it != out.rend(); ++it) {
    *it = heap.top().second;
    heap.pop();
  }
  return out;
}

std::vector<int> brute_force_knn(std::span<const Vec3> points, const Vec3& q, int k) {
  std::vector<Candidate> all(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    all[i] = {(points[i] - q).squaredNorm(), static_cast<int>(i)};
  }
  std::sort(all.begin(), all.end());
  std::vector<int> out(k);
  for (int i = 0; i < k; ++i) out[i] = all[i].second;
  return out;
}

}  // namespace rbfloi
