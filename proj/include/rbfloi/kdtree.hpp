#pragma once

#include <span>
#include <vector>

#include "rbfloi/linalg.hpp"

namespace rbfloi {

// Static 3-d tree over a borrowed point array. Queries are const and safe to
// run concurrently.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  // The k nearest points to q ordered by (distance, index); exact.
  std::vector<int> knn(const Vec3& q, int k) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    int begin, end;  // range in order_
    int left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
    Vec3 lo, hi;
  };

  int build(int begin, int end);

  std::span<const Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

// Reference O(N log N) per query search used by tests.
std::vector<int> brute_force_knn(std::span<const Vec3> points, const Vec3& q, int k);

}  // namespace rbfloi
