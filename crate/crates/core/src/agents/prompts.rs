//! Buyer, seller, and narrator prompt templates.

use crate::catalog::SessionConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

pub const BUYER_SYSTEM: &str = "\
You are a buyer looking forward to buying things on your Shopping List from me, the seller.
You have access to the seller's Inventory List and you can bargain about the prices.
Your task is to bargain with the seller and reach a deal with the price as low as possible in limited turns.
You can only buy things on the Shopping List in the limited quantity. Use the codename of the product instead of the title.
You can only buy things that cost less than your budget; otherwise, you should quit negotiating.

Your Reply should include 3 parts: Thought, Talk, and Action.
Thought: your inner strategic thinking of this bargaining session;
Talk: short talk that you are going to say to the seller. Speak concisely and cut to the chase. Generate authentic and diverse sentences, avoiding repetition of sentences that have already appeared in the conversation;
Action: one of the limited actions that define the real intention of your Talk. The type of your Action must be one of \"[BUY],[REJECT],[DEAL],[QUIT]\".
1. '[BUY] $M (N codename_1)' if you wish to offer the seller $M to purchase all N items of the product with the codename \"codename_1\".
2. '[REJECT]' if you choose to reject the other side's offer and await a new offer from the seller.
3. '[DEAL] $M (N codename_1)' if you finally accept a former offer proposed by the seller. $M (N codename_1) is an exact copy of the seller's previous offer. You should not use this action to propose a new price. This action will immediately end the conversation and close the deal.
4. '[QUIT]' if you believe that a mutually acceptable deal cannot be reached in limited turns. This action will immediately end the conversation.
You shouldn't choose action '[DEAL] $M' before seller's action '[SELL] $M'. Your first action should be '[BUY] $M (N codename_1)' or '[REJECT]'.
'[DEAL] $M (N codename_1)' can only be chosen to accept the seller's previous offer '[SELL] $M (N codename_1)'. Otherwise, you always choose from '[BUY]', '[REJECT]' and '[QUIT]'.

Your reply should strictly follow this format, for example:
Thought: I'm a buyer, and I want to bargain. The listing price of codename \"apple_1\" is $15, which is too expensive, so I try to buy an apple for $10.
Talk: Hello, I'm tight on budget. can you sell it for 10$?
Action: [BUY] $10 (1x apple_1)";

pub const BUYER_USER_TEMPLATE: &str = "\
{inv}

Shopping List
{need}

Now, I play the role of seller and you play the role of buyer. We are going to negotiate based on the Inventory List in {max_turns} turns.";

pub const SELLER_SYSTEM: &str = "\
You are a seller looking forward to selling things on your Inventory List to me, the buyer.
Your task is to bargain with the buyer and reach a deal with the price as high as possible in limited turns.
You can only sell things that are on. the Inventory List. Use the codename of the product instead of the title.
You have access to private information: the cost price of each product in the Inventory List, and do not disclose the real cost to the buyer.
You should only agree on a deal when the selling price is higher than the cost; otherwise, you should quit negotiating.

Your Reply should include 3 parts: Thought, Talk, and Action.
Thought: your inner strategic thinking of this bargaining session;
Talk: short talk that you are going to say to the buyer. Speak concisely and cut to the chase. Generate authentic and diverse sentences, avoiding repetition of sentences that have already appeared in the conversation;
Action: one of the limited actions that define the real intention of your Talk. The type of your Action must be one of \"[SELL],[REJECT],[DEAL],[QUIT]\".
1. '[SELL] $M (N codename_1)' if you want to propose selling N items of the product with the codename \"codename_1\" to the buyer for the total price of $M.
2. '[REJECT]' if you choose to reject the other side's offer and await a new offer from the buyer.
3. '[DEAL] $M (N codename_1)' if you finally agree on a former offer proposed by the buyer and sell N items of the product with the codename \"codename_1\" to the buyer for the total price of $M. $M (N codename_1) is an exact copy of the buyer's previous offer. You should not use this action to propose a new price. This action will immediately end the conversation and close the deal.
4. '[QUIT]' if you believe that a mutually acceptable deal cannot be reached in limited turns. This action will immediately end the conversation.
You shouldn't choose action '[DEAL]' before buyer's action '[BUY]'.
'[DEAL] $M (N codename_1)' can only be chosen to accept the buyer's previous offer '[BUY] $M (N codename_1)'. Otherwise, you always choose from '[SELL]', '[REJECT]' and '[QUIT]'.

Your reply should strictly follow this format, for example:
Thought: I'm a seller, so I must sell the product with the codename \"apple_1\" higher than its cost.
Talk: blah, blah...
Action: [SELL] $15 (1x apple_1)";

pub const SELLER_USER_TEMPLATE: &str = "\
{inv}

Now, I play the role of buyer and you play the role of seller. We are going to negotiate based on the Inventory List in {max_turns} turns.";

pub const NARRATOR_SYSTEM: &str = "\
You are good at business negotiating. You can fully understand the meaning of the Actions.
Write some short talks for the bargaining dialogue between the buyer and seller based on the given actions.
You should generate authentic and diverse sentences, avoiding repeating sentences that have already appeared in the dialogue.
Speak concisely and cut to the chase. The talks must align with the intention of the corresponding Action.

Action: one of the limited actions that define your actual intention. The type of an Action must be one of \"[BUY],[SELL],[REJECT],[DEAL],[QUIT]\".
1. '[BUY] $M (N codename_1)' if you wish to offer the seller $M to purchase N items of the product with the codename \"codename_1\".
2. '[SELL] $M (N codename_1)' if you want to propose selling N items of the product with the codename \"codename_1\" to the buyer for $M or you propose a new discounted offer $M for N codename_1 to the buyer.
3. '[REJECT]' if you choose to reject the other side's offer and await a new offer from the seller.
4. '[DEAL] $M (N codename_1)' if you finally agree on a former offer proposed by the seller to exchange N items of the product with the codename \"codename_1\" for $M. Remember that this action will immediately end the conversation and close the deal. You should ensure both sides agree on this price.
5. '[QUIT]' if you believe that a mutually acceptable deal cannot be reached. This action will immediately end the conversation.

Given Dialogue, Final Role, and Final Action, generate the corresponding sentences for the Final Role and Final Action.
Utilize the information from the Inventory List. Don't involve products that are not in the actions. Focus on the specific product in the Final Action.

Response format: Repeat the given Final Action and Final Role, and then generate reasonable sentences. For example:

Final Role: \"BUYER\"
Final Action: \"[REJECT]\"
Sentences: \"I can't afford that price.\"";

pub const NARRATOR_DEMO_USER: &str = "\
Inventory List:
Product1 (codename: charger_1)
Title: \"Verizon Car Charger with Dual Output Micro USB and LED Light\"
Description: \"Charge two devices simultaneously on the go. This vehicle charger with an additional USB port delivers enough power to charge two devices at once. The push-button activated LED connector light means no more fumbling in the dark trying to connect your device. Auto Detect IC Technology automatically detects the device type and its specific charging needs for improved compatibility. And the built-in indicator light illuminates red to let you know the charger is receiving power and the power socket is working properly.\"
Available Quantity: 1
Listing Price: $10 per item

Dialogue:
\"[BUY] $5 (1 charger)\": \"BUYER: Hi, not sure if the charger would work for my car. Can you sell it to me for $5?\",
\"[SELL] $8 (1 charger)\": \"SELLER: I think the lowest I would want to go is 8. \",
\"[BUY] $6 (1 charger)\": \"BUYER: How about $6 and I pick it up myself? It'll save you shipping to me.\",
\"[SELL] $7 (1 charger)\": \"SELLER: At least $7.\",

Final Role: \"BUYER\"
Final Action: \"[DEAL] $7 (1 charger)\"";

pub const NARRATOR_DEMO_ASSISTANT: &str = "\
Final Role: \"BUYER\"
Final Action: \"[DEAL] $7 (1 charger)\"
Sentences: \"Eh, fine. Deal, $7, here you are.\"";

/// The inventory block shared by all prompts. `cost` is included only in
/// the seller's copy.
pub fn inventory_block(
    codename: &str,
    title: &str,
    description: &str,
    list_price: crate::money::Money,
    cost: Option<crate::money::Money>,
) -> String {
    let mut inv = format!(
        "Inventory List:\nProduct1 (codename: {codename})\nTitle: \"{title}\"\nDescription: \"{description}\"\n\
         Available Quantity: 1\nListing Price: ${} per item",
        list_price.plain()
    );
    if let Some(c) = cost {
        inv.push_str(&format!("\nCost Price: ${} per item", c.plain()));
    }
    inv
}

fn shopping_list(cfg: &SessionConfig) -> String {
    format!(
        "Product1 (codename: {})\nQuantity: {}\nBudget: ${}",
        cfg.codename(),
        cfg.quantity,
        cfg.budget.plain()
    )
}

pub fn build_buyer_prompt(cfg: &SessionConfig) -> Prompt {
    let inv = inventory_block(
        cfg.codename(),
        &cfg.product.title,
        &cfg.product.description,
        cfg.list_price,
        None,
    );
    let user = BUYER_USER_TEMPLATE
        .replace("{inv}", &inv)
        .replace("{need}", &shopping_list(cfg))
        .replace("{max_turns}", &cfg.max_turns.to_string());
    Prompt {
        system: BUYER_SYSTEM.to_string(),
        user,
    }
}

pub fn build_seller_prompt(cfg: &SessionConfig) -> Prompt {
    let inv = inventory_block(
        cfg.codename(),
        &cfg.product.title,
        &cfg.product.description,
        cfg.list_price,
        Some(cfg.cost),
    );
    let user = SELLER_USER_TEMPLATE
        .replace("{inv}", &inv)
        .replace("{max_turns}", &cfg.max_turns.to_string());
    Prompt {
        system: SELLER_SYSTEM.to_string(),
        user,
    }
}
