#include "protoseg/metrics.hpp"

namespace protoseg {

namespace {

struct Tally {
  std::int64_t inter_fg = 0, union_fg = 0;
  std::int64_t inter_bg = 0, union_bg = 0;

  void add(const BinaryMask& pred, const BinaryMask& truth) {
    for (Index y = 0; y < pred.height(); ++y) {
      for (Index x = 0; x < pred.width(); ++x) {
        const bool p = pred(y, x) != 0;
        const bool t = truth(y, x) != 0;
        inter_fg += p && t;
        union_fg += p || t;
        inter_bg += !p && !t;
        union_bg += !p || !t;
      }
    }
  }

  ClassIou fg() const {
    if (union_fg == 0) return {1.0, true};
    return {static_cast<double>(inter_fg) / static_cast<double>(union_fg), false};
  }
  ClassIou bg() const {
    if (union_bg == 0) return {1.0, true};
    return {static_cast<double>(inter_bg) / static_cast<double>(union_bg), false};
  }
};

}  // namespace

MiouResult miou(const std::vector<BinaryMask>& preds, const std::vector<BinaryMask>& truths) {
  detail::require(preds.size() == truths.size(), "miou: pred/truth counts differ");
  detail::require(!preds.empty(), "miou: empty mask set");

  MiouResult result;
  Tally total;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    detail::require(preds[i].height() == truths[i].height() &&
                        preds[i].width() == truths[i].width(),
                    "miou: mask dimension mismatch");
    total.add(preds[i], truths[i]);

    Tally one;
    one.add(preds[i], truths[i]);
    const double episode_fg = one.fg().iou;
    result.per_episode_fg_iou.push_back(episode_fg);
    result.per_episode_miou.push_back((episode_fg + one.bg().iou) / 2.0);
  }

  result.fg = total.fg();
  result.bg = total.bg();
  result.miou = (result.fg.iou + result.bg.iou) / 2.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    result.mean_episode_miou += result.per_episode_miou[i];
    result.mean_episode_fg_iou += result.per_episode_fg_iou[i];
  }
  result.mean_episode_miou /= static_cast<double>(preds.size());
  result.mean_episode_fg_iou /= static_cast<double>(preds.size());
  return result;
}

}  // namespace protoseg
