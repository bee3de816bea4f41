#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace prog {

// Dense row-major double tensor. Rank 1 and 2 cover everything here.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(count(shape_), 0.0) {}
    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != count(shape_))
            throw std::invalid_argument("Tensor: shape/data size mismatch");
    }

    static Tensor vector(std::size_t n) { return Tensor({n}); }
    static Tensor matrix(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (auto s : shape) n *= s;
        return n;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Named trainable tensors of one network. Slot order is fixed at
// construction and is the order used by optimizers and checkpoints.
class ModelParams {
public:
    int add(const std::string& name, Tensor value, bool bias_exempt = false) {
        if (index_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
        index_[name] = static_cast<int>(tensors_.size());
        names_.push_back(name);
        l2_exempt_.push_back(bias_exempt);
        tensors_.push_back(std::move(value));
        return static_cast<int>(tensors_.size()) - 1;
    }

    std::size_t count() const { return tensors_.size(); }
    std::size_t total_values() const {
        std::size_t n = 0;
        for (const auto& t : tensors_) n += t.size();
        return n;
    }

    bool has(const std::string& name) const { return index_.count(name) != 0; }
    int slot(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
        return it->second;
    }
    const std::string& name(int slot) const { return names_.at(slot); }

    Tensor& operator[](int slot) { return tensors_.at(slot); }
    const Tensor& operator[](int slot) const { return tensors_.at(slot); }
    Tensor& get(const std::string& name) { return tensors_.at(slot(name)); }
    const Tensor& get(const std::string& name) const { return tensors_.at(slot(name)); }

    // Biases are flagged at registration and skipped by the L2 penalty.
    bool l2_exempt(int slot) const { return l2_exempt_.at(slot); }

private:
    std::vector<std::string> names_;
    std::vector<Tensor> tensors_;
    std::vector<bool> l2_exempt_;
    std::unordered_map<std::string, int> index_;
};

}  // namespace prog
