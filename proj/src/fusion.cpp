#include "dfn/fusion.hpp"

namespace dfn {

LossKind parse_loss_kind(const std::string& name) {
    if (name == "l2") return LossKind::L2;
    if (name == "l1") return LossKind::L1;
    if (name == "hinge") return LossKind::Hinge;
    if (name == "dice") return LossKind::Dice;
    if (name == "log") return LossKind::Log;
    throw std::invalid_argument("unknown loss kind: " + name +
                                " (expected l2, l1, hinge, dice or log)");
}

std::string loss_kind_name(LossKind kind) {
    switch (kind) {
        case LossKind::L2: return "l2";
        case LossKind::L1: return "l1";
        case LossKind::Hinge: return "hinge";
        case LossKind::Dice: return "dice";
        case LossKind::Log: return "log";
    }
    return "l2";
}

}  // namespace dfn
