#pragma once

#include <atomic>
#include <cstddef>
#include <optional>
#include <utility>

namespace ccc {

// Unbounded single-producer/single-consumer FIFO. The producer links a new
// node behind the tail; the consumer advances a dummy head node. Only the
// producer may call push(), only the consumer may call front()/try_pop()/
// empty().
template <class T>
class Channel {
 public:
  Channel() {
    Node* dummy = new Node();
    head_ = dummy;
    tail_ = dummy;
  }
  ~Channel() {
    while (head_) {
      Node* next = head_->next.load(std::memory_order_relaxed);
      delete head_;
      head_ = next;
    }
  }
  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  void push(T value) {
    Node* node = new Node();
    node->value.emplace(std::move(value));
    tail_->next.store(node, std::memory_order_release);
    tail_ = node;
    pushed_.fetch_add(1, std::memory_order_relaxed);
  }

  const T* front() const {
    Node* next = head_->next.load(std::memory_order_acquire);
    return next ? &*next->value : nullptr;
  }

  bool empty() const { return front() == nullptr; }

  std::optional<T> try_pop() {
    Node* next = head_->next.load(std::memory_order_acquire);
    if (!next) return std::nullopt;
    std::optional<T> out = std::move(next->value);
    next->value.reset();
    delete head_;
    head_ = next;
    popped_.fetch_add(1, std::memory_order_relaxed);
    return out;
  }

  std::size_t pushed() const { return pushed_.load(std::memory_order_relaxed); }
  std::size_t popped() const { return popped_.load(std::memory_order_relaxed); }

 private:
  struct Node {
    std::atomic<Node*> next{nullptr};
    std::optional<T> value;
  };

  // Consumer side.
  alignas(64) Node* head_;
  // Producer side.
  alignas(64) Node* tail_;
  std::atomic<std::size_t> pushed_{0};
  std::atomic<std::size_t> popped_{0};
};

}  // namespace ccc
